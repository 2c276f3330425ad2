/**
 * Wire-format telemetry events, matching the ingestion service's canonical
 * encoding. Timestamps are integer milliseconds since session start.
 */

export interface KeyDownEvent {
  t: number;
  type: 'key_down';
  key: string;
}

export interface KeyUpEvent {
  t: number;
  type: 'key_up';
  key: string;
}

export interface MouseMoveEvent {
  t: number;
  type: 'mouse_move';
  x: number;
  y: number;
}

export interface MouseDownEvent {
  t: number;
  type: 'mouse_down';
  button: string;
  x: number;
  y: number;
}

export interface MouseUpEvent {
  t: number;
  type: 'mouse_up';
  button: string;
  x: number;
  y: number;
}

export interface TelemetryDroppedEvent {
  t: number;
  type: 'telemetry_dropped';
  dropped: number;
}

export type InputEvent =
  | KeyDownEvent
  | KeyUpEvent
  | MouseMoveEvent
  | MouseDownEvent
  | MouseUpEvent
  | TelemetryDroppedEvent;

export const MOUSE_BUTTONS: Record<number, string> = {
  0: 'left',
  1: 'middle',
  2: 'right',
};

export function mouseButtonName(button: number): string {
  return MOUSE_BUTTONS[button] ?? `button${button}`;
}
