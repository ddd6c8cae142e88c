// Typed client for the generation service HTTP API.

export interface CorpusEntry {
    id: string;
    split: string;
    thumbnail: string; // base64 PNG
}

export interface CorpusListing {
    records: CorpusEntry[];
    labels: string[];
    palette: number[][];
}

export interface RecordPayload {
    id: string;
    image: string; // base64 PNG
    parse: string; // base64 paletted PNG
    keypoints: number[][];
    image_size: [number, number];
}

export interface ServiceErrorBody {
    code: string;
    message: string;
}

export class ApiError extends Error {
    constructor(
        readonly status: number,
        readonly code: string,
        message: string,
    ) {
        super(message);
    }
}

async function raiseForStatus(resp: Response): Promise<void> {
    if (resp.ok) return;
    let body: ServiceErrorBody = { code: `http_${resp.status}`, message: resp.statusText };
    try {
        const parsed = (await resp.json()) as Partial<ServiceErrorBody>;
        if (parsed && typeof parsed.message === "string") {
            body = { code: parsed.code ?? body.code, message: parsed.message };
        }
    } catch {
        // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, body.code, body.message);
}

export class ApiClient {
    constructor(readonly baseUrl: string = "") {}

    private url(path: string): string {
        return `${this.baseUrl}${path}`;
    }

    async health(): Promise<{ status: string; checkpoint_id: string }> {
        const resp = await fetch(this.url("/health"));
        await raiseForStatus(resp);
        return resp.json();
    }

    async corpus(): Promise<CorpusListing> {
        const resp = await fetch(this.url("/corpus"));
        await raiseForStatus(resp);
        return resp.json();
    }

    async record(id: string): Promise<RecordPayload> {
        const resp = await fetch(this.url(`/record/${encodeURIComponent(id)}`));
        await raiseForStatus(resp);
        return resp.json();
    }

    /** POST /generate; resolves to PNG bytes. */
    async generate(payload: Record<string, unknown>): Promise<Uint8Array> {
        const resp = await fetch(this.url("/generate"), {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(payload),
        });
        await raiseForStatus(resp);
        return new Uint8Array(await resp.arrayBuffer());
    }
}
