/** Linear and logarithmic axis scales with tick generation. */

export interface Scale {
  map(value: number): number;
  ticks: number[];
  domain: [number, number];
}

function niceStep(span: number, targetTicks: number): number {
  const raw = span / targetTicks;
  const power = 10 ** Math.floor(Math.log10(raw));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * power) return m * power;
  }
  return 10 * power;
}

export function linearScale(
  lo: number,
  hi: number,
  rangeLo: number,
  rangeHi: number,
  targetTicks = 5,
): Scale {
  if (!(hi > lo)) {
    hi = lo === 0 ? 1 : lo + Math.abs(lo);
  }
  const step = niceStep(hi - lo, targetTicks);
  const ticks: number[] = [];
  const first = Math.ceil(lo / step - 1e-9) * step;
  for (let v = first; v <= hi + 1e-9 * step; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * step ? 0 : v);
  }
  const k = (rangeHi - rangeLo) / (hi - lo);
  return {
    map: (value: number) => rangeLo + (value - lo) * k,
    ticks,
    domain: [lo, hi],
  };
}

export function logScale(
  lo: number,
  hi: number,
  rangeLo: number,
  rangeHi: number,
): Scale {
  if (!(lo > 0) || !(hi > lo)) {
    throw new Error(`log scale needs 0 < lo < hi, got [${lo}, ${hi}]`);
  }
  const decLo = Math.floor(Math.log10(lo));
  const decHi = Math.ceil(Math.log10(hi));
  const ticks: number[] = [];
  for (let d = decLo; d <= decHi; d++) {
    const tick = Number(`1e${d}`);
    if (tick >= lo / 1.0001 && tick <= hi * 1.0001) ticks.push(tick);
  }
  const la = Math.log10(lo);
  const k = (rangeHi - rangeLo) / (Math.log10(hi) - la);
  return {
    map: (value: number) => rangeLo + (Math.log10(value) - la) * k,
    ticks,
    domain: [lo, hi],
  };
}
