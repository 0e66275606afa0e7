// Display formatting only — no metric is ever computed on the client.

/** Two-decimal score, e.g. 0.72 -> "0.72"; missing values render as "--". */
export function formatScore(value: number | null | undefined): string {
  if (value === null || value === undefined || Number.isNaN(value)) return "--";
  return value.toFixed(2);
}

/** "filled / quota" counter, clamped so the display never exceeds the quota. */
export function formatCount(filled: number, quota: number): string {
  return `${Math.min(filled, quota)} / ${quota}`;
}

/** Bar width percentage in [0, 100]. */
export function barPercent(filled: number, quota: number): number {
  if (quota <= 0) return 0;
  return Math.min(100, Math.max(0, (filled / quota) * 100));
}
