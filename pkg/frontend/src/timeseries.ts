import type { TopicSeries } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const CHART = { width: 880, height: 260, marginX: 56, marginY: 28, barHalf: 10 };

/**
 * Post-share bars and contributor-share line for one topic, week by week.
 * Absent weeks simply have no mark (absent is not zero).
 */
export function renderTimeseries(
  container: HTMLElement,
  series: TopicSeries,
  allWeeks: number[],
): SVGSVGElement {
  container.textContent = "";
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${CHART.width} ${CHART.height}`);
  svg.setAttribute("class", "timeseries");

  const usableX = CHART.width - 2 * CHART.marginX;
  const usableY = CHART.height - 2 * CHART.marginY;
  const xFor = (week: number): number => {
    const index = allWeeks.indexOf(week);
    const step = allWeeks.length > 1 ? usableX / (allWeeks.length - 1) : 0;
    return CHART.marginX + index * step;
  };
  const yFor = (ratio: number): number =>
    CHART.height - CHART.marginY - ratio * usableY;

  for (const week of allWeeks) {
    const tick = document.createElementNS(SVG_NS, "text");
    tick.setAttribute("class", "week-tick");
    tick.setAttribute("x", String(xFor(week)));
    tick.setAttribute("y", String(CHART.height - 8));
    tick.setAttribute("text-anchor", "middle");
    tick.textContent = `w${week}`;
    svg.appendChild(tick);
  }

  const present = allWeeks.filter((w) => String(w) in series.points);
  for (const week of present) {
    const point = series.points[String(week)];
    const bar = document.createElementNS(SVG_NS, "rect");
    bar.setAttribute("class", "text-ratio-bar");
    bar.setAttribute("data-week", String(week));
    bar.setAttribute("data-value", String(point.text_ratio));
    bar.setAttribute("x", String(xFor(week) - CHART.barHalf));
    bar.setAttribute("y", String(yFor(point.text_ratio)));
    bar.setAttribute("width", String(2 * CHART.barHalf));
    bar.setAttribute(
      "height",
      String(CHART.height - CHART.marginY - yFor(point.text_ratio)),
    );
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `week ${week}: text_ratio ${point.text_ratio}`;
    bar.appendChild(title);
    svg.appendChild(bar);
  }

  if (present.length > 0) {
    const path = document.createElementNS(SVG_NS, "polyline");
    path.setAttribute("class", "contributor-ratio-line");
    path.setAttribute(
      "points",
      present
        .map((w) => `${xFor(w)},${yFor(series.points[String(w)].contributor_ratio)}`)
        .join(" "),
    );
    svg.appendChild(path);
    for (const week of present) {
      const point = series.points[String(week)];
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("class", "contributor-ratio-dot");
      dot.setAttribute("data-week", String(week));
      dot.setAttribute("data-value", String(point.contributor_ratio));
      dot.setAttribute("cx", String(xFor(week)));
      dot.setAttribute("cy", String(yFor(point.contributor_ratio)));
      dot.setAttribute("r", "4");
      svg.appendChild(dot);
    }
  }

  container.appendChild(svg);
  return svg;
}
