import type { LabelPayload, Stage, Stats, SubmitResult, Task } from "./types.js";

/** Thin client for the annotation service; throws ApiError on any failure. */

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
  }
}

async function getJson<T>(url: string): Promise<T> {
  let resp: Response;
  try {
    resp = await fetch(url);
  } catch (e) {
    throw new ApiError(`network failure: ${e}`);
  }
  if (!resp.ok) {
    throw new ApiError(`GET ${url} -> ${resp.status}`, resp.status);
  }
  return (await resp.json()) as T;
}

export class AnnotationApi {
  constructor(readonly baseUrl: string = "") {}

  async nextTask(annotator: string, stage: Stage): Promise<Task | null> {
    const params = new URLSearchParams({ annotator, stage });
    const body = await getJson<{ task: Task | null }>(
      `${this.baseUrl}/api/task?${params}`,
    );
    return body.task;
  }

  async submitLabel(
    annotator: string,
    instanceId: string,
    label: LabelPayload,
  ): Promise<SubmitResult> {
    let resp: Response;
    try {
      resp = await fetch(`${this.baseUrl}/api/label`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ annotator, instance_id: instanceId, label }),
      });
    } catch (e) {
      throw new ApiError(`network failure: ${e}`);
    }
    if (!resp.ok) {
      throw new ApiError(`POST /api/label -> ${resp.status}`, resp.status);
    }
    return (await resp.json()) as SubmitResult;
  }

  stats(): Promise<Stats> {
    return getJson<Stats>(`${this.baseUrl}/api/stats`);
  }

  async conflicts(): Promise<{ instance_id: string }[]> {
    const body = await getJson<{ conflicts: { instance_id: string }[] }>(
      `${this.baseUrl}/api/conflicts`,
    );
    return body.conflicts;
  }
}
