// Editable label grid with brush / flood-fill tools and undo history.
// All edits stay client-side until the user asks for a generation.

import { isCanonicalLabel } from "./palette.js";

export interface StrokePoint {
    x: number;
    y: number;
}

const MAX_HISTORY = 200;

export class ParseLayer {
    readonly width: number;
    readonly height: number;
    labels: Uint8Array;
    private undoStack: Uint8Array[] = [];
    private redoStack: Uint8Array[] = [];

    constructor(width: number, height: number, labels?: Uint8Array) {
        this.width = width;
        this.height = height;
        if (labels) {
            if (labels.length !== width * height) {
                throw new Error("label buffer size mismatch");
            }
            this.labels = new Uint8Array(labels);
        } else {
            this.labels = new Uint8Array(width * height);
        }
    }

    clone(): Uint8Array {
        return new Uint8Array(this.labels);
    }

    at(x: number, y: number): number {
        return this.labels[y * this.width + x];
    }

    private pushUndo(): void {
        this.undoStack.push(this.clone());
        if (this.undoStack.length > MAX_HISTORY) this.undoStack.shift();
        this.redoStack = [];
    }

    get undoDepth(): number {
        return this.undoStack.length;
    }

    /** Stamp a round brush along the stroke; interpolates between points. */
    paintStroke(points: StrokePoint[], label: number, brushSize: number): boolean {
        if (!isCanonicalLabel(label)) throw new Error(`label ${label} outside canonical palette`);
        if (points.length === 0) return false;
        const before = this.clone();
        const radius = Math.max(0.5, brushSize / 2);
        const stamp = (px: number, py: number) => {
            const r = Math.ceil(radius);
            for (let dy = -r; dy <= r; dy++) {
                for (let dx = -r; dx <= r; dx++) {
                    if (dx * dx + dy * dy > radius * radius) continue;
                    const x = Math.round(px + dx);
                    const y = Math.round(py + dy);
                    if (x >= 0 && x < this.width && y >= 0 && y < this.height) {
                        this.labels[y * this.width + x] = label;
                    }
                }
            }
        };
        let prev = points[0];
        stamp(prev.x, prev.y);
        for (const p of points.slice(1)) {
            const steps = Math.max(1, Math.ceil(Math.hypot(p.x - prev.x, p.y - prev.y)));
            for (let s = 1; s <= steps; s++) {
                stamp(prev.x + ((p.x - prev.x) * s) / steps, prev.y + ((p.y - prev.y) * s) / steps);
            }
            prev = p;
        }
        if (buffersEqual(before, this.labels)) return false; // no-op stroke
        this.undoStack.push(before);
        if (this.undoStack.length > MAX_HISTORY) this.undoStack.shift();
        this.redoStack = [];
        return true;
    }

    /** Relabel the 4-connected region under (x, y). */
    floodFill(x: number, y: number, label: number): boolean {
        if (!isCanonicalLabel(label)) throw new Error(`label ${label} outside canonical palette`);
        if (x < 0 || x >= this.width || y < 0 || y >= this.height) return false;
        const target = this.at(x, y);
        if (target === label) return false;
        this.pushUndo();
        const stack = [y * this.width + x];
        while (stack.length) {
            const idx = stack.pop()!;
            if (this.labels[idx] !== target) continue;
            this.labels[idx] = label;
            const cx = idx % this.width;
            if (cx > 0) stack.push(idx - 1);
            if (cx < this.width - 1) stack.push(idx + 1);
            if (idx >= this.width) stack.push(idx - this.width);
            if (idx < this.labels.length - this.width) stack.push(idx + this.width);
        }
        return true;
    }

    undo(): boolean {
        const prev = this.undoStack.pop();
        if (!prev) return false;
        this.redoStack.push(this.clone());
        this.labels = prev;
        return true;
    }

    redo(): boolean {
        const next = this.redoStack.pop();
        if (!next) return false;
        this.undoStack.push(this.clone());
        this.labels = next;
        return true;
    }
}

export function buffersEqual(a: Uint8Array, b: Uint8Array): boolean {
    if (a.length !== b.length) return false;
    for (let i = 0; i < a.length; i++) {
        if (a[i] !== b[i]) return false;
    }
    return true;
}
