// Forward kinematics re-implemented client-side, for drawing only: the
// server stays authoritative for every game decision. Mirrors the server's
// conventions: quaternions are [w, x, y, z], each joint's child segment
// extends along the joint's local +x axis.

import type { ChainDesc } from "./protocol.js";

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number];

export function quatMul(a: Quat, b: Quat): Quat {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return [
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ];
}

export function quatFromAxisAngle(axis: Vec3, angle: number): Quat {
  const half = angle / 2;
  const s = Math.sin(half);
  return [Math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s];
}

export function quatRotate(q: Quat, v: Vec3): Vec3 {
  const [w, qx, qy, qz] = q;
  const [vx, vy, vz] = v;
  const tx = 2 * (qy * vz - qz * vy);
  const ty = 2 * (qz * vx - qx * vz);
  const tz = 2 * (qx * vy - qy * vx);
  return [
    vx + w * tx + qy * tz - qz * ty,
    vy + w * ty + qz * tx - qx * tz,
    vz + w * tz + qx * ty - qy * tx,
  ];
}

/** Joint positions plus the effector position (N+1 points) for served
 * angles in degrees. */
export function fkPositions(chain: ChainDesc, anglesDeg: number[]): Vec3[] {
  let pos = (chain.base.position as Vec3) ?? [0, 0, 0];
  let q = (chain.base.orientation as Quat) ?? [1, 0, 0, 0];
  const points: Vec3[] = [[pos[0], pos[1], pos[2]]];
  chain.joints.forEach((joint, i) => {
    const theta = ((anglesDeg[i] ?? 0) * Math.PI) / 180;
    q = quatMul(q, quatFromAxisAngle(joint.axis as Vec3, theta));
    const step = quatRotate(q, [1, 0, 0]);
    pos = [
      pos[0] + step[0] * joint.length_m,
      pos[1] + step[1] * joint.length_m,
      pos[2] + step[2] * joint.length_m,
    ];
    points.push(pos);
  });
  return points;
}
