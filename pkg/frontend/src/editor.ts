// DOM-free editor state machine.
//
// Owns the loaded record, the editable parse layer and the generation
// feedback loop. The server is never mutated; edits stay local until an
// explicit generate call. At most one request is in flight: a generate
// issued while one is pending replaces any queued successor.

import { ApiClient, ApiError, RecordPayload } from "./api.js";
import { ParseLayer } from "./parseLayer.js";
import { base64ToBytes, bytesToBase64, decodeIndexedPng, encodeIndexedPng } from "./png.js";
import { paletteBytes } from "./palette.js";

export interface GenerationResult {
    png: Uint8Array;
    requestEcho: Record<string, unknown>;
}

export interface EditorError {
    code: string;
    message: string;
    retryable: boolean;
}

export class EditorState {
    recordId: string | null = null;
    imagePng: Uint8Array | null = null;
    parse: ParseLayer | null = null;
    originalParse: Uint8Array | null = null;
    activeLabel = 3;
    brushSize = 3;
    overlayOpacity = 0.55;
    lastGeneration: GenerationResult | null = null;
    lastError: EditorError | null = null;

    private inFlight: Promise<void> | null = null;
    private queued: Record<string, unknown> | null = null;

    constructor(readonly api: ApiClient) {}

    async loadRecord(id: string): Promise<void> {
        let payload: RecordPayload;
        try {
            payload = await this.api.record(id);
        } catch (e) {
            this.lastError = toEditorError(e);
            return; // state unchanged on load failure
        }
        const parseImg = await decodeIndexedPng(base64ToBytes(payload.parse));
        this.recordId = payload.id;
        this.imagePng = base64ToBytes(payload.image);
        this.parse = new ParseLayer(parseImg.width, parseImg.height, parseImg.pixels);
        this.originalParse = new Uint8Array(parseImg.pixels);
        this.lastGeneration = null;
        this.lastError = null;
    }

    paint(points: { x: number; y: number }[]): boolean {
        if (!this.parse) return false;
        return this.parse.paintStroke(points, this.activeLabel, this.brushSize);
    }

    fill(x: number, y: number): boolean {
        if (!this.parse) return false;
        return this.parse.floodFill(x, y, this.activeLabel);
    }

    undo(): boolean {
        return this.parse ? this.parse.undo() : false;
    }

    redo(): boolean {
        return this.parse ? this.parse.redo() : false;
    }

    async serializeParse(): Promise<string> {
        if (!this.parse) throw new Error("no record loaded");
        const png = await encodeIndexedPng(
            this.parse.labels,
            this.parse.width,
            this.parse.height,
            paletteBytes(),
        );
        return bytesToBase64(png);
    }

    /** Manipulation request for the current canvas. */
    async requestGeneration(): Promise<void> {
        if (!this.recordId) throw new Error("no record loaded");
        const payload = {
            mode: "manipulation",
            reference_id: this.recordId,
            edited_parse: await this.serializeParse(),
        };
        return this.submit(payload);
    }

    /** Texture transfer between two corpus records (one direction). */
    async requestTransfer(referenceId: string, donorId: string): Promise<void> {
        return this.submit({
            mode: "texture_transfer",
            reference_id: referenceId,
            donor_id: donorId,
        });
    }

    /** Queue-replace submission: later calls supersede a pending one. */
    private async submit(payload: Record<string, unknown>): Promise<void> {
        this.queued = payload;
        if (this.inFlight) return this.inFlight;
        this.inFlight = (async () => {
            while (this.queued) {
                const next = this.queued;
                this.queued = null;
                try {
                    const png = await this.api.generate(next);
                    this.lastGeneration = { png, requestEcho: next };
                    this.lastError = null;
                } catch (e) {
                    this.lastError = toEditorError(e);
                }
            }
            this.inFlight = null;
        })();
        return this.inFlight;
    }

    isDirty(): boolean {
        if (!this.parse || !this.originalParse) return false;
        const cur = this.parse.labels;
        for (let i = 0; i < cur.length; i++) {
            if (cur[i] !== this.originalParse[i]) return true;
        }
        return false;
    }
}

export function toEditorError(e: unknown): EditorError {
    if (e instanceof ApiError) {
        return { code: e.code, message: e.message, retryable: e.status >= 500 };
    }
    const message = e instanceof Error ? e.message : String(e);
    return { code: "network", message, retryable: true };
}
