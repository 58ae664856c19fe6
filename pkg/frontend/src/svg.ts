/** Minimal deterministic SVG string building. */

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function tag(
  name: string,
  attrs: Array<[string, string | number]>,
  content = "",
): string {
  const parts = attrs.map(([k, v]) => `${k}="${v}"`).join(" ");
  const open = parts.length ? `<${name} ${parts}` : `<${name}`;
  return content.length ? `${open}>${content}</${name}>` : `${open}/>`;
}

export function polylinePath(points: Array<[number, number]>): string {
  if (points.length === 0) return "";
  return points
    .map(([x, y], i) => `${i === 0 ? "M" : "L"}${x} ${y}`)
    .join(" ");
}

export function polygonPath(points: Array<[number, number]>): string {
  return points.length ? `${polylinePath(points)} Z` : "";
}
