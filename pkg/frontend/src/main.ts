import { ApiClient } from './api.js';
import { createApp } from './app.js';

declare global {
  interface Window {
    FDPLENS_API_BASE?: string;
  }
}

const params = new URLSearchParams(window.location.search);
const base =
  params.get('api') ?? window.FDPLENS_API_BASE ?? window.location.origin;

const root = document.getElementById('app');
if (!root) throw new Error('missing #app container');
createApp(root, new ApiClient(base));
