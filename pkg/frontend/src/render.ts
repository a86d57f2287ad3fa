// Side (x,z) and front (y,z) projections of the chain, mirroring how the
// robot's postures are usually presented: a pair of 2D silhouettes.
// Geometry is computed separately from canvas painting so headless tests
// can verify it without a real canvas.

import { fkPositions } from "./fk.js";
import type { ChainDesc } from "./protocol.js";

export interface Silhouette {
  side: [number, number][];
  front: [number, number][];
}

export function silhouette(chain: ChainDesc, anglesDeg: number[]): Silhouette {
  const points = fkPositions(chain, anglesDeg);
  return {
    side: points.map((p) => [p[0], p[2]]),
    front: points.map((p) => [p[1], p[2]]),
  };
}

/** Largest point-wise distance between two silhouettes (meters). */
export function silhouetteDistance(a: Silhouette, b: Silhouette): number {
  let worst = 0;
  for (const view of ["side", "front"] as const) {
    const pa = a[view];
    const pb = b[view];
    const n = Math.min(pa.length, pb.length);
    for (let i = 0; i < n; i++) {
      worst = Math.max(worst, Math.hypot(pa[i][0] - pb[i][0], pa[i][1] - pb[i][1]));
    }
  }
  return worst;
}

export interface DrawOptions {
  width: number;
  height: number;
  scale: number; // pixels per meter
  color?: string;
  jointRadius?: number;
}

function drawView(
  ctx: CanvasRenderingContext2D,
  points: [number, number][],
  opts: DrawOptions,
  offsetX: number,
): void {
  const { height, scale, color = "#e8b44c", jointRadius = 5 } = opts;
  const originY = height - 24;
  const toPx = (p: [number, number]): [number, number] => [
    offsetX + p[0] * scale,
    originY - p[1] * scale,
  ];
  ctx.strokeStyle = color;
  ctx.lineWidth = 6;
  ctx.lineCap = "round";
  ctx.beginPath();
  points.forEach((p, i) => {
    const [x, y] = toPx(p);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
  ctx.fillStyle = "#3b3b3b";
  for (const p of points) {
    const [x, y] = toPx(p);
    ctx.beginPath();
    ctx.arc(x, y, jointRadius, 0, Math.PI * 2);
    ctx.fill();
  }
  // the head: a larger dot on the effector
  const [hx, hy] = toPx(points[points.length - 1]);
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(hx, hy, jointRadius * 1.8, 0, Math.PI * 2);
  ctx.fill();
}

/** Paint both projections side by side on one canvas. */
export function drawChain(canvas: HTMLCanvasElement, s: Silhouette, opts?: Partial<DrawOptions>): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return; // headless environments render geometry only
  const options: DrawOptions = {
    width: canvas.width,
    height: canvas.height,
    scale: opts?.scale ?? canvas.height * 1.6,
    color: opts?.color,
    jointRadius: opts?.jointRadius,
  };
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "12px sans-serif";
  ctx.fillStyle = "#888";
  ctx.fillText("side", 12, 16);
  ctx.fillText("front", canvas.width / 2 + 12, 16);
  drawView(ctx, s.side, options, canvas.width * 0.18);
  // the front view is centered: y spans negative..positive
  drawView(ctx, s.front, options, canvas.width * 0.72);
}

export function expressionColor(expression: string): string {
  switch (expression) {
    case "warm":
      return "#e2593b";
    case "cold":
      return "#4f7fd9";
    default:
      return "#e8b44c";
  }
}
