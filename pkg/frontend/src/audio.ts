// Optional key sounds through the browser's audio synthesis; off until the
// player flips the toggle.

export class KeyAudio {
  enabled = false;
  private ctx: AudioContext | null = null;

  play(midi: number): void {
    if (!this.enabled || typeof AudioContext === "undefined") return;
    this.ctx = this.ctx ?? new AudioContext();
    const osc = this.ctx.createOscillator();
    const gain = this.ctx.createGain();
    osc.frequency.value = 440 * 2 ** ((midi - 69) / 12);
    osc.type = "triangle";
    gain.gain.setValueAtTime(0.15, this.ctx.currentTime);
    gain.gain.exponentialRampToValueAtTime(1e-4, this.ctx.currentTime + 0.4);
    osc.connect(gain).connect(this.ctx.destination);
    osc.start();
    osc.stop(this.ctx.currentTime + 0.4);
  }
}
