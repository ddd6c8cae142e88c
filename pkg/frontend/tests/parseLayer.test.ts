import { describe, expect, it } from "vitest";
import { ParseLayer, buffersEqual } from "../src/parseLayer.js";

function layer(w = 16, h = 12): ParseLayer {
    const labels = new Uint8Array(w * h);
    labels.fill(0);
    for (let y = 4; y < 8; y++) for (let x = 4; x < 8; x++) labels[y * w + x] = 3;
    return new ParseLayer(w, h, labels);
}

describe("ParseLayer", () => {
    it("paint then undo restores the exact original bytes", () => {
        const l = layer();
        const original = l.clone();
        const changed = l.paintStroke([{ x: 2, y: 2 }, { x: 10, y: 9 }], 4, 3);
        expect(changed).toBe(true);
        expect(buffersEqual(l.labels, original)).toBe(false);
        expect(l.undo()).toBe(true);
        expect(buffersEqual(l.labels, original)).toBe(true);
    });

    it("redo restores the painted state exactly", () => {
        const l = layer();
        l.paintStroke([{ x: 3, y: 3 }], 5, 4);
        const painted = l.clone();
        l.undo();
        expect(l.redo()).toBe(true);
        expect(buffersEqual(l.labels, painted)).toBe(true);
    });

    it("zero-length stroke is a no-op with no undo entry", () => {
        const l = layer();
        const before = l.undoDepth;
        expect(l.paintStroke([], 4, 3)).toBe(false);
        expect(l.undoDepth).toBe(before);
    });

    it("stroke that changes nothing records no undo entry", () => {
        const l = layer();
        const before = l.undoDepth;
        // paint label 3 onto an area that is already label 3
        expect(l.paintStroke([{ x: 5.5, y: 5.5 }], 3, 1)).toBe(false);
        expect(l.undoDepth).toBe(before);
    });

    it("stroke interpolates between distant points", () => {
        const l = layer(20, 4);
        l.paintStroke([{ x: 1, y: 2 }, { x: 18, y: 2 }], 7, 1);
        for (let x = 1; x <= 18; x++) {
            expect(l.at(x, 2)).toBe(7);
        }
    });

    it("flood fill relabels the connected region uniformly", () => {
        const l = layer();
        expect(l.floodFill(5, 5, 9)).toBe(true);
        for (let y = 4; y < 8; y++) {
            for (let x = 4; x < 8; x++) expect(l.at(x, y)).toBe(9);
        }
        expect(l.at(0, 0)).toBe(0); // background untouched
        l.undo();
        expect(l.at(5, 5)).toBe(3);
    });

    it("flood fill with the same label is a no-op", () => {
        const l = layer();
        expect(l.floodFill(5, 5, 3)).toBe(false);
    });

    it("rejects non-canonical labels", () => {
        const l = layer();
        expect(() => l.paintStroke([{ x: 1, y: 1 }], 255, 1)).toThrow(/canonical/);
        expect(() => l.floodFill(0, 0, -1)).toThrow(/canonical/);
    });

    it("brush never paints outside the grid", () => {
        const l = layer(8, 8);
        l.paintStroke([{ x: 0, y: 0 }, { x: 7, y: 7 }], 6, 9);
        expect(l.labels.length).toBe(64);
    });
});
