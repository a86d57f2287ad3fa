// The single local string table: every visible text maps from a served
// prompt id; nothing else is composed client-side.

import type { PromptDesc } from "./protocol.js";

const ORDINALS = ["zeroth", "1st", "2nd", "3rd", "4th", "5th", "6th"];

const INSTRUCTION_PAGES = [
  "A piece of music is hiding in this piano. The robot knows it by heart - watch it closely while you hunt for each note. Step on any key to continue.",
  "Find the notes one by one, in order. When you get one right, the robot nods. After each part you get to replay what you found. Step on any key to start!",
];

export function promptText(prompt: PromptDesc): string {
  switch (prompt.id) {
    case "start":
      return "Step on the D key to begin!";
    case "instructions":
      return INSTRUCTION_PAGES[prompt.ordinal] ?? "Step on any key to continue.";
    case "discover_note":
      return `Discover the ${ORDINALS[prompt.ordinal] ?? `${prompt.ordinal}th`} note!`;
    case "replay_part":
      return "Nice! Replay the part: follow the highlighted keys.";
    case "full_replay":
      return "Full replay! Play the whole piece along the highlights.";
    case "done":
      return "Piece complete. Thanks for playing!";
    default:
      return "";
  }
}

export function connectionText(state: string): string {
  switch (state) {
    case "connecting":
      return "connecting…";
    case "reconnecting":
      return "reconnecting…";
    case "closed":
      return "session ended";
    default:
      return "";
  }
}
