import { ApiClient } from "./api.js";
import { EditorUi } from "./ui.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app root element");

const ui = new EditorUi(new ApiClient(""), root);
void ui.boot().catch((e) => {
    root.innerHTML = `<p class="error">service unreachable: ${e instanceof Error ? e.message : e}</p>`;
});
