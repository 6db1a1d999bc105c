// Turns the scenario image payload into a flat draw list, then paints it.
// Building the scene is pure data work so it can be tested without a canvas.

import type { ImageModel } from "./api.js";

export const CELL_FILL: Record<string, string> = {
  "room-left": "#f4e9d4",
  "room-right": "#e3edf7",
  corridor: "#dddddd",
  door: "#c9b458",
};

export const WALL_FILL = "#4a4a4a";
export const OBJECT_FILL: Record<string, string> = {
  red: "#c0392b",
  blue: "#2e6da4",
};
export const ROBOT_STROKE = "#1d7a36";
export const STATION_STROKE = "#8e44ad";

export type SceneRect = {
  x: number;
  y: number;
  w: number;
  h: number;
  fill: string;
};

export type SceneShape = {
  shape: "circle" | "square" | "triangle";
  fill: string;
  cx: number;
  cy: number;
  size: number;
};

export type SceneMarker = {
  kind: "robot" | "station";
  cx: number;
  cy: number;
  radius: number;
};

export type SceneLabel = { text: string; cx: number; cy: number };

export type Scene = {
  width: number;
  height: number;
  cellSize: number;
  rects: SceneRect[];
  shapes: SceneShape[];
  markers: SceneMarker[];
  labels: SceneLabel[];
};

export function buildScene(image: ImageModel, cellSize = 64): Scene {
  const byId = new Map(image.cells.map((c) => [c.id, c]));
  const center = (id: string): { cx: number; cy: number } => {
    const cell = byId.get(id);
    if (!cell) {
      throw new Error(`unknown cell id: ${id}`);
    }
    return { cx: (cell.x + 0.5) * cellSize, cy: (cell.y + 0.5) * cellSize };
  };

  const rects: SceneRect[] = [
    // walls everywhere, then the reachable cells on top
    { x: 0, y: 0, w: image.width * cellSize, h: image.height * cellSize, fill: WALL_FILL },
  ];
  for (const cell of image.cells) {
    rects.push({
      x: cell.x * cellSize,
      y: cell.y * cellSize,
      w: cellSize,
      h: cellSize,
      fill: CELL_FILL[cell.kind] ?? "#ffffff",
    });
  }

  const shapes: SceneShape[] = image.objects.map((obj) => ({
    shape: obj.shape,
    fill: OBJECT_FILL[obj.color] ?? obj.color,
    ...center(obj.cell),
    size: cellSize * 0.42,
  }));

  const markers: SceneMarker[] = [
    { kind: "station", ...center(image.station), radius: cellSize * 0.46 },
    { kind: "robot", ...center(image.robot), radius: cellSize * 0.36 },
  ];

  const labels: SceneLabel[] = image.doors.map((door) => ({
    text: door.name,
    cx: (door.x + 0.5) * cellSize,
    cy: (door.y + 0.5) * cellSize,
  }));

  return {
    width: image.width * cellSize,
    height: image.height * cellSize,
    cellSize,
    rects,
    shapes,
    markers,
    labels,
  };
}

export function drawScene(ctx: CanvasRenderingContext2D, scene: Scene): void {
  for (const rect of scene.rects) {
    ctx.fillStyle = rect.fill;
    ctx.fillRect(rect.x, rect.y, rect.w, rect.h);
    ctx.strokeStyle = "#999";
    ctx.lineWidth = 1;
    ctx.strokeRect(rect.x, rect.y, rect.w, rect.h);
  }

  for (const shape of scene.shapes) {
    ctx.fillStyle = shape.fill;
    const half = shape.size / 2;
    ctx.beginPath();
    switch (shape.shape) {
      case "circle":
        ctx.arc(shape.cx, shape.cy, half, 0, Math.PI * 2);
        break;
      case "square":
        ctx.rect(shape.cx - half, shape.cy - half, shape.size, shape.size);
        break;
      case "triangle":
        ctx.moveTo(shape.cx, shape.cy - half);
        ctx.lineTo(shape.cx + half, shape.cy + half);
        ctx.lineTo(shape.cx - half, shape.cy + half);
        ctx.closePath();
        break;
    }
    ctx.fill();
  }

  for (const marker of scene.markers) {
    ctx.strokeStyle = marker.kind === "robot" ? ROBOT_STROKE : STATION_STROKE;
    ctx.lineWidth = marker.kind === "robot" ? 4 : 2;
    ctx.beginPath();
    ctx.arc(marker.cx, marker.cy, marker.radius, 0, Math.PI * 2);
    ctx.stroke();
    if (marker.kind === "robot") {
      ctx.fillStyle = ROBOT_STROKE;
      ctx.beginPath();
      ctx.arc(marker.cx, marker.cy, marker.radius * 0.35, 0, Math.PI * 2);
      ctx.fill();
    }
  }

  ctx.fillStyle = "#222";
  ctx.font = `${Math.round(scene.cellSize * 0.18)}px sans-serif`;
  ctx.textAlign = "center";
  for (const label of scene.labels) {
    ctx.fillText(label.text, label.cx, label.cy + scene.cellSize * 0.42);
  }
}
