/** Linear and log position scales for the hand-rolled SVG charts. */

export function linear(domain: [number, number], range: [number, number]) {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

/** Log-scale position, symmetric around 1 for odds ratios. */
export function logScale(maxAbsLog: number, range: [number, number]) {
  const lin = linear([-maxAbsLog, maxAbsLog], range);
  return (v: number) => {
    const clamped = Math.max(Math.min(Math.log(v), maxAbsLog), -maxAbsLog);
    return lin(clamped);
  };
}

/** Largest |ln v| over the finite odds ratios and CI edges, at least ln 2. */
export function oddsExtent(values: Array<number | null>): number {
  let m = Math.log(2);
  for (const v of values) {
    if (v !== null && v > 0 && Number.isFinite(v)) {
      m = Math.max(m, Math.abs(Math.log(v)));
    }
  }
  return m;
}
