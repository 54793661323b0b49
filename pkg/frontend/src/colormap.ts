export type ColormapName = "diverging" | "sequential";

type Rgb = [number, number, number];

// Blue-white-red ramp for signed fields (zero maps to white).
const DIVERGING: Rgb[] = [
  [5, 48, 97],
  [33, 102, 172],
  [67, 147, 195],
  [146, 197, 222],
  [247, 247, 247],
  [244, 165, 130],
  [214, 96, 77],
  [178, 24, 43],
  [103, 0, 31],
];

// Dark-to-bright ramp for nonnegative fields.
const SEQUENTIAL: Rgb[] = [
  [68, 1, 84],
  [70, 50, 127],
  [54, 92, 141],
  [39, 127, 142],
  [31, 161, 135],
  [74, 194, 109],
  [159, 218, 58],
  [253, 231, 37],
];

function ramp(anchors: Rgb[], t: number): string {
  const clamped = Math.min(Math.max(t, 0), 1);
  const pos = clamped * (anchors.length - 1);
  const lo = Math.floor(pos);
  const hi = Math.min(lo + 1, anchors.length - 1);
  const frac = pos - lo;
  const mix = anchors[lo].map((c, i) =>
    Math.round(c + frac * (anchors[hi][i] - c)),
  );
  return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
}

/** Map a value in [lo, hi] to a deterministic CSS color. */
export function colorFor(
  name: ColormapName,
  value: number,
  lo: number,
  hi: number,
): string {
  const span = hi - lo;
  const t = span > 0 ? (value - lo) / span : 0.5;
  return name === "diverging" ? ramp(DIVERGING, t) : ramp(SEQUENTIAL, t);
}

export const MISSING_COLOR = "rgb(255,255,255)";
