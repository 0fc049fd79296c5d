import { setupApp } from "./app";
import "./style.css";

const baseUrl = new URLSearchParams(window.location.search).get("api") ?? "";

const studio = setupApp(document, baseUrl);
studio.run(() => studio.start());
