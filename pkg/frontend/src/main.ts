import { TaskloadApi } from './api.js';
import { TaskloadApp } from './app.js';

const params = new URLSearchParams(window.location.search);
const serviceUrl = params.get('service') ?? window.location.origin;
const subjectId = params.get('subject') ?? `subject-${Date.now().toString(36)}`;

const root = document.getElementById('app');
if (!root) {
  throw new Error('missing #app mount point');
}

const app = new TaskloadApp(new TaskloadApi(serviceUrl), root, { subjectId });
void app.start();

window.addEventListener('beforeunload', () => {
  void app.stop();
});
