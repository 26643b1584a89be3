// Deployment configuration: point the console at a recognition service.
window.SERVER_URL = "http://127.0.0.1:8000";
