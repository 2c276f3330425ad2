/**
 * Raw input capture: key down/up with key identifiers, unthrottled mouse
 * moves, and clicks, all timestamped relative to session start. Batch
 * flushing bounds the request rate, so no client-side move throttling.
 */

import { mouseButtonName, type InputEvent } from './events.js';

export type EventSink = (event: InputEvent) => void;

export class InputCapture {
  private detach: Array<() => void> = [];

  constructor(
    private readonly target: EventTarget,
    private readonly clock: () => number, // ms since session start
    private readonly sink: EventSink,
  ) {}

  start(): void {
    if (this.detach.length > 0) {
      return;
    }
    this.listen('keydown', (e) => {
      const key = (e as KeyboardEvent).key;
      if ((e as KeyboardEvent).repeat) {
        return; // synthetic auto-repeat would fake dwell pairs
      }
      this.sink({ t: this.clock(), type: 'key_down', key });
    });
    this.listen('keyup', (e) => {
      this.sink({ t: this.clock(), type: 'key_up', key: (e as KeyboardEvent).key });
    });
    this.listen('mousemove', (e) => {
      const me = e as MouseEvent;
      this.sink({ t: this.clock(), type: 'mouse_move', x: me.clientX, y: me.clientY });
    });
    this.listen('mousedown', (e) => {
      const me = e as MouseEvent;
      this.sink({
        t: this.clock(),
        type: 'mouse_down',
        button: mouseButtonName(me.button),
        x: me.clientX,
        y: me.clientY,
      });
    });
    this.listen('mouseup', (e) => {
      const me = e as MouseEvent;
      this.sink({
        t: this.clock(),
        type: 'mouse_up',
        button: mouseButtonName(me.button),
        x: me.clientX,
        y: me.clientY,
      });
    });
  }

  private listen(name: string, handler: (e: Event) => void): void {
    this.target.addEventListener(name, handler);
    this.detach.push(() => this.target.removeEventListener(name, handler));
  }

  stop(): void {
    for (const off of this.detach) {
      off();
    }
    this.detach = [];
  }
}
