import { ApiClient } from './api';
import { SessionController } from './controller';

const container = document.getElementById('app');
if (!container) {
  throw new Error('missing #app container');
}
const api = new ApiClient('');
const controller = new SessionController(api, container);
controller.attach();
void controller.start();
