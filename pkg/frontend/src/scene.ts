/**
 * Schematic 3D scene: course geometry plus the live drone pose projected
 * isometrically onto a 2D canvas. Geometry is built as a draw-op list so it
 * can be tested without a DOM; renderToCanvas is the only part touching a
 * real 2D context.
 */

import { CourseData, QuadTelemetry } from "./protocol.js";

export type Vec3 = [number, number, number];

export interface View {
  scale: number; // px per meter
  originX: number; // screen px of world (0,0,0)
  originY: number;
}

// dimetric projection: world x to the lower right, y to the lower left, z up
const COS30 = Math.cos(Math.PI / 6);
const SIN30 = 0.5;

export function project(p: Vec3, view: View): [number, number] {
  const sx = (p[0] - p[1]) * COS30 * view.scale + view.originX;
  const sy = ((p[0] + p[1]) * SIN30 - p[2]) * view.scale + view.originY;
  return [sx, sy];
}

export type DrawOp =
  | { kind: "poly"; points: [number, number][]; color: string; close: boolean; width: number }
  | { kind: "fill"; points: [number, number][]; color: string }
  | { kind: "text"; at: [number, number]; text: string; color: string };

function circlePoints(cx: number, cy: number, z: number, radius: number,
                      view: View, segments = 24): [number, number][] {
  const pts: [number, number][] = [];
  for (let i = 0; i < segments; i++) {
    const a = (i / segments) * 2 * Math.PI;
    pts.push(project([cx + radius * Math.cos(a), cy + radius * Math.sin(a), z], view));
  }
  return pts;
}

export function buildCourseOps(course: CourseData, view: View): DrawOp[] {
  const ops: DrawOp[] = [];
  const [bx0, by0] = course.bounds.min;
  const [bx1, by1] = course.bounds.max;
  ops.push({
    kind: "poly", close: true, color: "#555", width: 1,
    points: [
      project([bx0, by0, 0], view), project([bx1, by0, 0], view),
      project([bx1, by1, 0], view), project([bx0, by1, 0], view),
    ],
  });

  const pad = course.landing_pad;
  ops.push({ kind: "fill", color: "rgba(70,130,220,0.4)",
             points: circlePoints(pad.center_xy[0], pad.center_xy[1], 0, pad.radius, view) });

  for (const gate of course.gates) {
    const [cx, cy, cz] = gate.center;
    const n = gate.normal;
    // width axis: horizontal, perpendicular to the normal
    const len = Math.hypot(n[0], n[1]) || 1;
    const u: Vec3 = [-n[1] / len, n[0] / len, 0];
    const hw = gate.width / 2;
    const hh = gate.height / 2;
    const corners: Vec3[] = [
      [cx - u[0] * hw, cy - u[1] * hw, cz - hh],
      [cx + u[0] * hw, cy + u[1] * hw, cz - hh],
      [cx + u[0] * hw, cy + u[1] * hw, cz + hh],
      [cx - u[0] * hw, cy - u[1] * hw, cz + hh],
    ];
    ops.push({ kind: "poly", close: true, color: "#3bb143", width: 3,
               points: corners.map((c) => project(c, view)) });
  }

  for (const obstacle of course.obstacles) {
    const [ox, oy] = obstacle.center_xy;
    ops.push({ kind: "fill", color: "rgba(220,70,70,0.5)",
               points: circlePoints(ox, oy, 0, obstacle.radius, view) });
    ops.push({ kind: "poly", close: false, color: "#dc4646", width: 2,
               points: [project([ox, oy, 0], view),
                        project([ox, oy, obstacle.height], view)] });
    ops.push({ kind: "poly", close: true, color: "#dc4646", width: 1,
               points: circlePoints(ox, oy, obstacle.height, obstacle.radius, view) });
  }
  return ops;
}

const ARM_LEN = 0.22; // drawn arm half-span, exaggerated for visibility

export function buildDroneOps(quad: QuadTelemetry, view: View): DrawOp[] {
  const [x, y, z] = quad.position;
  const yaw = (quad.euler_deg[2] * Math.PI) / 180;
  const cosY = Math.cos(yaw);
  const sinY = Math.sin(yaw);
  const fwd: Vec3 = [x + cosY * ARM_LEN, y + sinY * ARM_LEN, z];
  const back: Vec3 = [x - cosY * ARM_LEN * 0.6, y - sinY * ARM_LEN * 0.6, z];
  const left: Vec3 = [x - sinY * ARM_LEN * 0.6, y + cosY * ARM_LEN * 0.6, z];
  const right: Vec3 = [x + sinY * ARM_LEN * 0.6, y - cosY * ARM_LEN * 0.6, z];
  const color = quad.armed ? "#ffb000" : "#999";
  return [
    // ground shadow anchors altitude perception
    { kind: "fill", color: "rgba(0,0,0,0.25)",
      points: circlePoints(x, y, 0, 0.1, view, 12) },
    { kind: "poly", close: false, color: "#777", width: 1,
      points: [project([x, y, 0] as Vec3, view), project([x, y, z] as Vec3, view)] },
    { kind: "fill", color,
      points: [project(fwd, view), project(left, view), project(back, view),
               project(right, view)] },
  ];
}

export interface Canvas2DLike {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
  strokeStyle: string | unknown;
  fillStyle: string | unknown;
  lineWidth: number;
}

export function renderOps(ctx: Canvas2DLike, ops: DrawOp[]): void {
  for (const op of ops) {
    if (op.kind === "text") {
      ctx.fillStyle = op.color;
      ctx.fillText(op.text, op.at[0], op.at[1]);
      continue;
    }
    ctx.beginPath();
    op.points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
    if (op.kind === "fill") {
      ctx.closePath();
      ctx.fillStyle = op.color;
      ctx.fill();
    } else {
      if (op.close) ctx.closePath();
      ctx.strokeStyle = op.color;
      ctx.lineWidth = op.width;
      ctx.stroke();
    }
  }
}
