/**
 * View state and the controller that drives it.
 *
 * The controller owns all talk with the service. Mutations go through a
 * single promise queue so at most one request is in flight and queued
 * interactions apply in order. Every number the UI shows is copied
 * verbatim out of the last result document; nothing is recomputed here.
 */

import { ApiClient, ApiError } from "./api.js";
import { ghostPolyline } from "./bezier.js";
import {
  IDENTITY,
  ViewTransform,
  fitImage,
  insideImage,
  screenToImage,
} from "./transform.js";
import type { CurveOutcome, Layer, Point, ResultDocument } from "./types.js";

/** Curve entry order: endpoints then bulge (default), or click order. */
export type EntryOrder = "endpoints-first" | "sequential";

export interface Rejection {
  at: Point; // screen coordinates of the click that completed the curve
  reason: string;
}

export interface ViewState {
  session: string | null;
  layer: Layer;
  transform: ViewTransform;
  imageWidth: number;
  imageHeight: number;
  /** Image-space points of the curve under construction, at most 2. */
  pending: Point[];
  curves: CurveOutcome[];
  result: ResultDocument | null;
  /** Screen point of an ignored out-of-bounds click, for a visual nudge. */
  nudge: Point | null;
  rejection: Rejection | null;
  /** Server-side 4xx text, rendered inline near the controls. */
  inlineError: string | null;
  /** Set when the service is unreachable; controls disable. */
  banner: string | null;
  busy: boolean;
}

export interface ControllerOptions {
  debounceMs?: number;
  entryOrder?: EntryOrder;
}

type Listener = (state: ViewState) => void;

function freshState(): ViewState {
  return {
    session: null,
    layer: "annotated",
    transform: IDENTITY,
    imageWidth: 0,
    imageHeight: 0,
    pending: [],
    curves: [],
    result: null,
    nudge: null,
    rejection: null,
    inlineError: null,
    banner: null,
    busy: false,
  };
}

export class SessionController {
  readonly state: ViewState = freshState();

  private listeners = new Set<Listener>();
  private queue: Promise<void> = Promise.resolve();
  private pendingPatch: { timer: ReturnType<typeof setTimeout> | null; patch: Record<string, unknown> } = {
    timer: null,
    patch: {},
  };
  private readonly debounceMs: number;
  private readonly entryOrder: EntryOrder;

  constructor(
    private readonly api: ApiClient,
    options: ControllerOptions = {},
  ) {
    this.debounceMs = options.debounceMs ?? 250;
    this.entryOrder = options.entryOrder ?? "endpoints-first";
  }

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  /** Wait until every queued mutation has settled. */
  async idle(): Promise<void> {
    // patches debounce before they enqueue, so flush those first
    if (this.pendingPatch.timer !== null) {
      clearTimeout(this.pendingPatch.timer);
      this.pendingPatch.timer = null;
      this.enqueuePatch();
    }
    let tail;
    do {
      tail = this.queue;
      await tail;
    } while (tail !== this.queue);
  }

  controlsDisabled(): boolean {
    return this.state.banner !== null || this.state.session === null;
  }

  /**
   * The numbers the readout panel shows, verbatim from the last result.
   * Returns null before the first analysis or while a threshold is needed.
   */
  readout() {
    const doc = this.state.result;
    if (!doc || !doc.report || !doc.diagnostics) return null;
    return {
      ratio: doc.report.damage_ratio,
      internalPx: doc.report.internal_damage_px,
      borderPx: doc.report.border_damage_px,
      totalPx: doc.report.total_leaf_px,
      totalCm2: doc.report.total_cm2,
      damageCm2: doc.report.damage_cm2,
      threshold: doc.diagnostics.threshold,
      autoThreshold: doc.diagnostics.auto_threshold,
      revision: doc.revision,
    };
  }

  // ---------------------------------------------------------------- session

  async open(image: BodyInit, contentType: string): Promise<void> {
    this.state.banner = null;
    this.state.inlineError = null;
    try {
      const doc = await this.api.createSession(image, contentType);
      this.adopt(doc);
      this.state.pending = [];
      this.state.rejection = null;
    } catch (err) {
      this.fail(err);
      throw err;
    } finally {
      this.emit();
    }
  }

  /** Call once the preview image has loaded and its natural size is known. */
  setImageSize(width: number, height: number, viewW?: number, viewH?: number): void {
    this.state.imageWidth = width;
    this.state.imageHeight = height;
    if (viewW !== undefined && viewH !== undefined) {
      this.state.transform = fitImage(width, height, viewW, viewH);
    }
    this.emit();
  }

  setTransform(t: ViewTransform): void {
    this.state.transform = t;
    this.emit();
  }

  setLayer(layer: Layer): void {
    // layer switches never touch pending points (state retention)
    this.state.layer = layer;
    this.emit();
  }

  async refresh(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    try {
      this.adopt(await this.api.getResult(session));
    } catch (err) {
      this.fail(err);
    }
    this.emit();
  }

  // ----------------------------------------------------------------- curves

  /**
   * Handle a click on the canvas. The first two clicks collect points;
   * the third completes the curve and submits it. Out-of-bounds clicks
   * are ignored apart from a nudge marker.
   */
  placeControlPoint(screen: Point): void {
    if (this.controlsDisabled() || !this.state.result || this.state.result.needs_threshold) return;
    const image = screenToImage(this.state.transform, screen);
    if (!insideImage(image, this.state.imageWidth, this.state.imageHeight)) {
      this.state.nudge = screen;
      this.emit();
      return;
    }
    this.state.nudge = null;
    this.state.rejection = null;

    if (this.state.pending.length < 2) {
      this.state.pending.push(image);
      this.emit();
      return;
    }

    // third point: assemble the curve and clear pending before the POST
    const [first, second] = this.state.pending as [Point, Point];
    const ordered: Point[] =
      this.entryOrder === "endpoints-first" ? [first, image, second] : [first, second, image];
    this.state.pending = [];
    this.emit();
    this.submitCurve(ordered, screen);
  }

  /** Ghost polyline while the cursor hovers as the tentative third point. */
  ghost(mouse: Point): Point[] | null {
    if (this.state.pending.length !== 2) return null;
    const cursor = screenToImage(this.state.transform, mouse);
    const [first, second] = this.state.pending as [Point, Point];
    return this.entryOrder === "endpoints-first"
      ? ghostPolyline(first, cursor, second)
      : ghostPolyline(first, second, cursor);
  }

  private submitCurve(points: Point[], clickedAt: Point): void {
    const session = this.state.session;
    if (!session) return;
    this.mutate(async () => {
      const body = points.map((p) => [p.x, p.y] as [number, number]);
      // the response is the result document plus a submitted_curve echo;
      // only the document part becomes state
      const { submitted_curve, ...doc } = await this.api.addCurve(session, body);
      this.adopt(doc);
      if (submitted_curve.status === "rejected") {
        this.state.rejection = {
          at: clickedAt,
          reason: submitted_curve.reason ?? "curve rejected",
        };
      }
    });
  }

  removeCurve(index: number): void {
    const session = this.state.session;
    if (!session || this.controlsDisabled()) return;
    this.mutate(async () => {
      this.adopt(await this.api.removeCurve(session, index));
    });
  }

  // ----------------------------------------------------------------- config

  setThreshold(value: number | null): void {
    this.schedulePatch({ threshold: value });
  }

  setMinSize(value: number | null): void {
    this.schedulePatch({ min_size: value });
  }

  setChannel(channel: "L" | "a" | "b"): void {
    this.schedulePatch({ channel });
  }

  private schedulePatch(fields: Record<string, unknown>): void {
    if (this.controlsDisabled()) return;
    Object.assign(this.pendingPatch.patch, fields);
    if (this.pendingPatch.timer !== null) clearTimeout(this.pendingPatch.timer);
    this.pendingPatch.timer = setTimeout(() => {
      this.pendingPatch.timer = null;
      this.enqueuePatch();
    }, this.debounceMs);
  }

  private enqueuePatch(): void {
    const session = this.state.session;
    const patch = this.pendingPatch.patch;
    if (!session || Object.keys(patch).length === 0) return;
    this.pendingPatch.patch = {};
    this.mutate(async () => {
      this.adopt(await this.api.patchConfig(session, patch));
    });
  }

  // --------------------------------------------------------------- plumbing

  private mutate(job: () => Promise<void>): void {
    this.state.busy = true;
    this.emit();
    this.queue = this.queue
      .then(job)
      .catch((err) => this.fail(err))
      .then(() => {
        this.state.busy = false;
        this.emit();
      });
  }

  private adopt(doc: ResultDocument): void {
    this.state.session = doc.session;
    this.state.result = doc;
    this.state.curves = doc.curves;
    this.state.inlineError = null;
  }

  private fail(err: unknown): void {
    if (err instanceof ApiError) {
      this.state.inlineError = err.message;
    } else {
      this.state.banner = "analysis service unreachable, check that it is running";
    }
  }
}
