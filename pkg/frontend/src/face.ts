// Pointer-driven face position: the mouse stands in for the player walking
// around in front of the piano. Normalized pointer coordinates over the
// play-area element map onto the scene's standing strip.

import type { SceneDesc, SessionInput } from "./protocol.js";

export class FaceCursor {
  constructor(
    private scene: SceneDesc,
    private post: (input: SessionInput) => void,
  ) {}

  /** Map normalized (0..1) pointer coordinates to scene meters: left-right
   * walks across the piano, up-down steps closer to or away from the robot.
   * The head height stays at standing height. */
  mapToScene(normX: number, normY: number): { x: number; y: number; z: number } {
    const clampedX = Math.min(1, Math.max(0, normX));
    const clampedY = Math.min(1, Math.max(0, normY));
    const y = this.scene.y_min + clampedX * (this.scene.y_max - this.scene.y_min);
    const x = this.scene.player_x + (0.5 - clampedY) * 0.3;
    return { x, y, z: this.scene.player_z };
  }

  pointerMove(normX: number, normY: number): void {
    const p = this.mapToScene(normX, normY);
    this.post({ type: "face_position", x: p.x, y: p.y, z: p.z });
  }

  pointerLeave(): void {
    this.post({ type: "face_lost" });
  }
}
