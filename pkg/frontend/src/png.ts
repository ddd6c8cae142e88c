// Minimal 8-bit paletted/grayscale PNG codec.
//
// Parse maps travel between client and server as paletted PNGs whose
// indices ARE the label ids, so decoding to the palette index (never via
// RGB matching) keeps round trips pixel-exact. Compression uses the
// platform CompressionStream / DecompressionStream ("deflate" = zlib),
// available in modern browsers and node >= 18.

const PNG_SIGNATURE = [137, 80, 78, 71, 13, 10, 26, 10];

export interface IndexedImage {
    width: number;
    height: number;
    pixels: Uint8Array; // row-major palette indices / gray values
    palette: Uint8Array | null; // RGB triples when color type 3
}

let crcTable: Uint32Array | null = null;

function crc32(bytes: Uint8Array, start: number, length: number): number {
    if (!crcTable) {
        crcTable = new Uint32Array(256);
        for (let n = 0; n < 256; n++) {
            let c = n;
            for (let k = 0; k < 8; k++) {
                c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
            }
            crcTable[n] = c >>> 0;
        }
    }
    let crc = 0xffffffff;
    for (let i = start; i < start + length; i++) {
        crc = crcTable[(crc ^ bytes[i]) & 0xff] ^ (crc >>> 8);
    }
    return (crc ^ 0xffffffff) >>> 0;
}

async function pipeThrough(
    data: Uint8Array,
    stream: CompressionStream | DecompressionStream,
): Promise<Uint8Array> {
    const copy = new Uint8Array(data.byteLength);
    copy.set(data);
    const src = new Blob([copy.buffer as ArrayBuffer]);
    const piped = src.stream().pipeThrough(stream as ReadableWritablePair<Uint8Array, Uint8Array>);
    const buf = await new Response(piped).arrayBuffer();
    return new Uint8Array(buf);
}

function inflate(data: Uint8Array): Promise<Uint8Array> {
    return pipeThrough(data, new DecompressionStream("deflate"));
}

function deflate(data: Uint8Array): Promise<Uint8Array> {
    return pipeThrough(data, new CompressionStream("deflate"));
}

function readU32(b: Uint8Array, off: number): number {
    return ((b[off] << 24) | (b[off + 1] << 16) | (b[off + 2] << 8) | b[off + 3]) >>> 0;
}

function paeth(a: number, b: number, c: number): number {
    const p = a + b - c;
    const pa = Math.abs(p - a);
    const pb = Math.abs(p - b);
    const pc = Math.abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

export async function decodeIndexedPng(bytes: Uint8Array): Promise<IndexedImage> {
    for (let i = 0; i < 8; i++) {
        if (bytes[i] !== PNG_SIGNATURE[i]) throw new Error("not a PNG file");
    }
    let off = 8;
    let width = 0;
    let height = 0;
    let colorType = -1;
    let palette: Uint8Array | null = null;
    const idat: Uint8Array[] = [];
    while (off + 8 <= bytes.length) {
        const length = readU32(bytes, off);
        const type = String.fromCharCode(bytes[off + 4], bytes[off + 5], bytes[off + 6], bytes[off + 7]);
        const data = bytes.subarray(off + 8, off + 8 + length);
        if (type === "IHDR") {
            width = readU32(data, 0);
            height = readU32(data, 4);
            const bitDepth = data[8];
            colorType = data[9];
            const interlace = data[12];
            if (bitDepth !== 8) throw new Error(`unsupported bit depth ${bitDepth}`);
            if (colorType !== 3 && colorType !== 0) {
                throw new Error(`unsupported color type ${colorType} (need paletted or grayscale)`);
            }
            if (interlace !== 0) throw new Error("interlaced PNGs are not supported");
        } else if (type === "PLTE") {
            palette = new Uint8Array(data);
        } else if (type === "IDAT") {
            idat.push(new Uint8Array(data));
        } else if (type === "IEND") {
            break;
        }
        off += 12 + length;
    }
    if (width === 0 || height === 0) throw new Error("missing IHDR");
    const zl = new Uint8Array(idat.reduce((n, c) => n + c.length, 0));
    let z = 0;
    for (const c of idat) {
        zl.set(c, z);
        z += c.length;
    }
    const raw = await inflate(zl);
    const stride = width + 1; // filter byte + 1 byte per pixel
    if (raw.length < stride * height) throw new Error("truncated PNG data");
    const pixels = new Uint8Array(width * height);
    for (let y = 0; y < height; y++) {
        const filter = raw[y * stride];
        const row = raw.subarray(y * stride + 1, y * stride + 1 + width);
        const out = pixels.subarray(y * width, (y + 1) * width);
        const prev = y > 0 ? pixels.subarray((y - 1) * width, y * width) : null;
        for (let x = 0; x < width; x++) {
            const left = x > 0 ? out[x - 1] : 0;
            const up = prev ? prev[x] : 0;
            const upLeft = prev && x > 0 ? prev[x - 1] : 0;
            let v = row[x];
            switch (filter) {
                case 0:
                    break;
                case 1:
                    v = (v + left) & 0xff;
                    break;
                case 2:
                    v = (v + up) & 0xff;
                    break;
                case 3:
                    v = (v + ((left + up) >> 1)) & 0xff;
                    break;
                case 4:
                    v = (v + paeth(left, up, upLeft)) & 0xff;
                    break;
                default:
                    throw new Error(`unknown PNG filter ${filter}`);
            }
            out[x] = v;
        }
    }
    return { width, height, pixels, palette };
}

function chunk(type: string, data: Uint8Array): Uint8Array {
    const out = new Uint8Array(12 + data.length);
    const dv = new DataView(out.buffer);
    dv.setUint32(0, data.length);
    for (let i = 0; i < 4; i++) out[4 + i] = type.charCodeAt(i);
    out.set(data, 8);
    dv.setUint32(8 + data.length, crc32(out, 4, 4 + data.length));
    return out;
}

export async function encodeIndexedPng(
    pixels: Uint8Array,
    width: number,
    height: number,
    palette: Uint8Array,
): Promise<Uint8Array> {
    if (pixels.length !== width * height) {
        throw new Error(`pixel buffer ${pixels.length} != ${width}x${height}`);
    }
    const ihdr = new Uint8Array(13);
    const dv = new DataView(ihdr.buffer);
    dv.setUint32(0, width);
    dv.setUint32(4, height);
    ihdr[8] = 8; // bit depth
    ihdr[9] = 3; // paletted
    const raw = new Uint8Array((width + 1) * height);
    for (let y = 0; y < height; y++) {
        raw[y * (width + 1)] = 0; // filter: none
        raw.set(pixels.subarray(y * width, (y + 1) * width), y * (width + 1) + 1);
    }
    const idat = await deflate(raw);
    const parts = [
        new Uint8Array(PNG_SIGNATURE),
        chunk("IHDR", ihdr),
        chunk("PLTE", palette),
        chunk("IDAT", idat),
        chunk("IEND", new Uint8Array(0)),
    ];
    const total = parts.reduce((n, p) => n + p.length, 0);
    const out = new Uint8Array(total);
    let o = 0;
    for (const p of parts) {
        out.set(p, o);
        o += p.length;
    }
    return out;
}

export function bytesToBase64(bytes: Uint8Array): string {
    let bin = "";
    const step = 0x8000;
    for (let i = 0; i < bytes.length; i += step) {
        bin += String.fromCharCode(...bytes.subarray(i, i + step));
    }
    return btoa(bin);
}

export function base64ToBytes(b64: string): Uint8Array {
    const bin = atob(b64);
    const out = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
    return out;
}
