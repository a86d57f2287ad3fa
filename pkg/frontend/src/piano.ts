// Clickable floor piano: one button per key, black keys overlaid between
// the white ones, replay highlights driven by served frames only.

import type { KeyboardDesc } from "./protocol.js";

const WHITE_KEY_WIDTH = 46;
const BLACK_KEY_WIDTH = 30;

export class PianoView {
  readonly keys: HTMLElement[] = [];
  private highlighted = new Set<number>();

  constructor(
    container: HTMLElement,
    keyboard: KeyboardDesc,
    onPress: (key: number) => void,
  ) {
    container.innerHTML = "";
    container.classList.add("piano");
    let whiteIndex = 0;
    for (let i = 0; i < keyboard.count; i++) {
      const isWhite = keyboard.white[i];
      const key = container.ownerDocument.createElement("button");
      key.className = `piano-key ${isWhite ? "white" : "black"}`;
      key.dataset.key = String(i);
      key.dataset.note = keyboard.names[i];
      const label = container.ownerDocument.createElement("span");
      label.textContent = keyboard.names[i];
      key.appendChild(label);
      if (isWhite) {
        key.style.left = `${whiteIndex * WHITE_KEY_WIDTH}px`;
        whiteIndex += 1;
      } else {
        key.style.left = `${whiteIndex * WHITE_KEY_WIDTH - BLACK_KEY_WIDTH / 2}px`;
      }
      key.addEventListener("click", () => {
        key.classList.add("pressed");
        setTimeout(() => key.classList.remove("pressed"), 150);
        onPress(i);
      });
      container.appendChild(key);
      this.keys.push(key);
    }
    container.style.width = `${whiteIndex * WHITE_KEY_WIDTH}px`;
  }

  setHighlights(keys: Iterable<number>): void {
    const next = new Set(keys);
    for (const i of this.highlighted) {
      if (!next.has(i)) this.keys[i]?.classList.remove("highlight");
    }
    for (const i of next) {
      if (!this.highlighted.has(i)) this.keys[i]?.classList.add("highlight");
    }
    this.highlighted = next;
  }
}
