// Canonical 10-label palette. Must stay in sync with the server's
// constants module; index is the label id stored in parse PNGs.

export interface LabelInfo {
    id: number;
    name: string;
    rgb: [number, number, number];
}

export const LABELS: LabelInfo[] = [
    { id: 0, name: "background", rgb: [0, 0, 0] },
    { id: 1, name: "face", rgb: [255, 200, 150] },
    { id: 2, name: "hair", rgb: [90, 60, 30] },
    { id: 3, name: "upper clothes", rgb: [220, 40, 40] },
    { id: 4, name: "pants", rgb: [40, 60, 200] },
    { id: 5, name: "skirt", rgb: [180, 40, 180] },
    { id: 6, name: "left arm", rgb: [250, 150, 60] },
    { id: 7, name: "right arm", rgb: [250, 220, 60] },
    { id: 8, name: "left leg", rgb: [60, 180, 60] },
    { id: 9, name: "right leg", rgb: [60, 220, 220] },
];

export const NUM_LABELS = LABELS.length;

export function paletteBytes(): Uint8Array {
    const out = new Uint8Array(NUM_LABELS * 3);
    LABELS.forEach((l, i) => {
        out[3 * i] = l.rgb[0];
        out[3 * i + 1] = l.rgb[1];
        out[3 * i + 2] = l.rgb[2];
    });
    return out;
}

export function isCanonicalLabel(v: number): boolean {
    return Number.isInteger(v) && v >= 0 && v < NUM_LABELS;
}
