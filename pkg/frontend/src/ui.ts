// DOM wiring: canvas rendering, pointer handling, tabs, legend, results.

import { ApiClient } from "./api.js";
import { EditorState } from "./editor.js";
import { LABELS } from "./palette.js";

const SCALE = 6; // editor zoom for the 64x48 desk corpus

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    attrs: Record<string, string> = {},
    parent?: HTMLElement,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    for (const [k, v] of Object.entries(attrs)) {
        if (k === "text") node.textContent = v;
        else node.setAttribute(k, v);
    }
    parent?.appendChild(node);
    return node;
}

async function pngToImageBitmap(png: Uint8Array): Promise<ImageBitmap> {
    return createImageBitmap(new Blob([png.buffer.slice(0) as ArrayBuffer], { type: "image/png" }));
}

export class EditorUi {
    private state: EditorState;
    private imageCanvas!: HTMLCanvasElement;
    private overlayCanvas!: HTMLCanvasElement;
    private resultImg!: HTMLImageElement;
    private statusLine!: HTMLElement;
    private recordSelect!: HTMLSelectElement;
    private transferA!: HTMLSelectElement;
    private transferB!: HTMLSelectElement;
    private transferOut!: HTMLElement;
    private painting = false;
    private tool: "brush" | "fill" = "brush";

    constructor(private api: ApiClient, private root: HTMLElement) {
        this.state = new EditorState(api);
    }

    async boot(): Promise<void> {
        const health = await this.api.health();
        const corpus = await this.api.corpus();
        this.buildLayout(corpus.records.map((r) => r.id), health.checkpoint_id);
        if (corpus.records.length) {
            await this.load(corpus.records[0].id);
        }
    }

    private buildLayout(ids: string[], checkpointId: string): void {
        this.root.innerHTML = "";
        const header = el("header", {}, this.root);
        el("h1", { text: "Semantic map editor" }, header);
        el("span", { class: "checkpoint", text: `checkpoint ${checkpointId}` }, header);

        const tabs = el("nav", {}, this.root);
        const manipBtn = el("button", { text: "Manipulate", class: "tab active" }, tabs);
        const transferBtn = el("button", { text: "Transfer", class: "tab" }, tabs);
        const manipPane = el("section", { class: "pane" }, this.root);
        const transferPane = el("section", { class: "pane hidden" }, this.root);
        manipBtn.onclick = () => {
            manipBtn.classList.add("active");
            transferBtn.classList.remove("active");
            manipPane.classList.remove("hidden");
            transferPane.classList.add("hidden");
        };
        transferBtn.onclick = () => {
            transferBtn.classList.add("active");
            manipBtn.classList.remove("active");
            transferPane.classList.remove("hidden");
            manipPane.classList.add("hidden");
        };

        // --- manipulate pane
        const controls = el("div", { class: "controls" }, manipPane);
        this.recordSelect = el("select", {}, controls);
        for (const id of ids) el("option", { value: id, text: id }, this.recordSelect);
        this.recordSelect.onchange = () => void this.load(this.recordSelect.value);

        const legend = el("div", { class: "legend" }, controls);
        for (const label of LABELS) {
            const btn = el("button", { class: "label-btn", title: label.name }, legend);
            btn.style.background = `rgb(${label.rgb.join(",")})`;
            el("span", { text: label.name }, btn);
            btn.onclick = () => {
                this.state.activeLabel = label.id;
                legend.querySelectorAll(".label-btn").forEach((b) => b.classList.remove("active"));
                btn.classList.add("active");
            };
            if (label.id === this.state.activeLabel) btn.classList.add("active");
        }

        const toolRow = el("div", { class: "tools" }, controls);
        const brushBtn = el("button", { text: "Brush", class: "active" }, toolRow);
        const fillBtn = el("button", { text: "Fill" }, toolRow);
        brushBtn.onclick = () => {
            this.tool = "brush";
            brushBtn.classList.add("active");
            fillBtn.classList.remove("active");
        };
        fillBtn.onclick = () => {
            this.tool = "fill";
            fillBtn.classList.add("active");
            brushBtn.classList.remove("active");
        };
        el("label", { text: "brush" }, toolRow);
        const brush = el("input", { type: "range", min: "1", max: "9", value: "3" }, toolRow);
        brush.oninput = () => (this.state.brushSize = Number(brush.value));
        el("label", { text: "overlay" }, toolRow);
        const opacity = el("input", { type: "range", min: "0", max: "100", value: "55" }, toolRow);
        opacity.oninput = () => {
            this.state.overlayOpacity = Number(opacity.value) / 100;
            this.overlayCanvas.style.opacity = String(this.state.overlayOpacity);
        };
        const undoBtn = el("button", { text: "Undo" }, toolRow);
        undoBtn.onclick = () => {
            if (this.state.undo()) this.drawOverlay();
        };
        const redoBtn = el("button", { text: "Redo" }, toolRow);
        redoBtn.onclick = () => {
            if (this.state.redo()) this.drawOverlay();
        };
        const genBtn = el("button", { text: "Generate", class: "generate" }, toolRow);
        genBtn.onclick = () => void this.generate();

        const workspace = el("div", { class: "workspace" }, manipPane);
        const stack = el("div", { class: "canvas-stack" }, workspace);
        this.imageCanvas = el("canvas", {}, stack);
        this.overlayCanvas = el("canvas", {}, stack);
        this.overlayCanvas.style.opacity = String(this.state.overlayOpacity);
        const resultBox = el("div", { class: "result" }, workspace);
        el("h2", { text: "Last generation" }, resultBox);
        this.resultImg = el("img", { alt: "generation result" }, resultBox);
        this.statusLine = el("p", { class: "status" }, manipPane);

        this.bindPointer();

        // --- transfer pane
        const tControls = el("div", { class: "controls" }, transferPane);
        el("label", { text: "record A" }, tControls);
        this.transferA = el("select", {}, tControls);
        el("label", { text: "record B" }, tControls);
        this.transferB = el("select", {}, tControls);
        for (const id of ids) {
            el("option", { value: id, text: id }, this.transferA);
            el("option", { value: id, text: id }, this.transferB);
        }
        const bothBtn = el("button", { text: "Transfer A <-> B", class: "generate" }, tControls);
        this.transferOut = el("div", { class: "transfer-out" }, transferPane);
        bothBtn.onclick = () => void this.transferBoth();
    }

    private bindPointer(): void {
        let stroke: { x: number; y: number }[] = [];
        const toGrid = (ev: PointerEvent) => {
            const rect = this.overlayCanvas.getBoundingClientRect();
            return {
                x: ((ev.clientX - rect.left) / rect.width) * (this.state.parse?.width ?? 1),
                y: ((ev.clientY - rect.top) / rect.height) * (this.state.parse?.height ?? 1),
            };
        };
        this.overlayCanvas.addEventListener("pointerdown", (ev) => {
            if (!this.state.parse) return;
            const p = toGrid(ev);
            if (this.tool === "fill") {
                if (this.state.fill(Math.floor(p.x), Math.floor(p.y))) this.drawOverlay();
                return;
            }
            this.painting = true;
            stroke = [p];
            this.overlayCanvas.setPointerCapture(ev.pointerId);
        });
        this.overlayCanvas.addEventListener("pointermove", (ev) => {
            if (!this.painting) return;
            stroke.push(toGrid(ev));
            // live preview: paint incrementally in small segments
        });
        this.overlayCanvas.addEventListener("pointerup", () => {
            if (this.painting && stroke.length) {
                this.state.paint(stroke);
                this.drawOverlay();
            }
            this.painting = false;
            stroke = [];
        });
    }

    private async load(id: string): Promise<void> {
        await this.state.loadRecord(id);
        if (this.state.lastError) {
            this.setStatus(`load failed: ${this.state.lastError.message}`, true);
            return;
        }
        const parse = this.state.parse!;
        for (const canvas of [this.imageCanvas, this.overlayCanvas]) {
            canvas.width = parse.width;
            canvas.height = parse.height;
            canvas.style.width = `${parse.width * SCALE}px`;
            canvas.style.height = `${parse.height * SCALE}px`;
        }
        const bitmap = await pngToImageBitmap(this.state.imagePng!);
        this.imageCanvas.getContext("2d")!.drawImage(bitmap, 0, 0);
        this.drawOverlay();
        this.setStatus(`loaded ${id}`);
    }

    private drawOverlay(): void {
        const parse = this.state.parse;
        if (!parse) return;
        const ctx = this.overlayCanvas.getContext("2d")!;
        const img = ctx.createImageData(parse.width, parse.height);
        for (let i = 0; i < parse.labels.length; i++) {
            const rgb = LABELS[parse.labels[i]].rgb;
            img.data[4 * i] = rgb[0];
            img.data[4 * i + 1] = rgb[1];
            img.data[4 * i + 2] = rgb[2];
            img.data[4 * i + 3] = parse.labels[i] === 0 ? 40 : 255;
        }
        ctx.putImageData(img, 0, 0);
    }

    private async generate(): Promise<void> {
        this.setStatus("generating...");
        await this.state.requestGeneration();
        if (this.state.lastError) {
            const e = this.state.lastError;
            this.setStatus(
                `generation failed (${e.code}): ${e.message}${e.retryable ? " - retry?" : ""}`,
                true,
            );
            return;
        }
        const png = this.state.lastGeneration!.png;
        this.resultImg.src = URL.createObjectURL(
            new Blob([png.buffer.slice(0) as ArrayBuffer], { type: "image/png" }),
        );
        this.resultImg.style.width = `${this.state.parse!.width * SCALE}px`;
        this.setStatus("done - keep editing and regenerate");
    }

    private async transferBoth(): Promise<void> {
        const a = this.transferA.value;
        const b = this.transferB.value;
        this.transferOut.innerHTML = "";
        for (const [ref, donor, title] of [
            [a, b, `${a} -> ${b}`],
            [b, a, `${b} -> ${a}`],
        ] as const) {
            await this.state.requestTransfer(ref, donor);
            const box = el("figure", {}, this.transferOut);
            el("figcaption", { text: title }, box);
            if (this.state.lastError) {
                el("p", { class: "error", text: this.state.lastError.message }, box);
            } else {
                const img = el("img", {}, box);
                const png = this.state.lastGeneration!.png;
                img.src = URL.createObjectURL(
                    new Blob([png.buffer.slice(0) as ArrayBuffer], { type: "image/png" }),
                );
                img.style.width = `${(this.state.parse?.width ?? 48) * SCALE}px`;
            }
        }
    }

    private setStatus(text: string, isError = false): void {
        this.statusLine.textContent = text;
        this.statusLine.classList.toggle("error", isError);
    }
}
