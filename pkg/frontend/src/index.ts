/**
 * Client bindings for the patchmix toolkit.
 *
 * Each function stages its inputs as the toolkit's wire formats (COCO JSON,
 * detections JSON, PNG trees), drives the CLI, and parses the outputs back
 * into typed values. No toolkit logic is reimplemented here, so results are
 * identical to direct CLI runs by construction.
 */

import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { RasterBuffer, decodePng, encodePng, rasterBuffer } from "./buffer";
import { runCli } from "./runner";
import {
  AnnotationEntry,
  AugmentReport,
  ChangeRecord,
  CocoDocument,
  DetectionRecord,
  LossBreakdown,
  MixRecordEntry,
  OutcomePartition,
  PartitionEntry,
} from "./types";

export * from "./buffer";
export * from "./runner";
export * from "./types";

export interface NoiseOptions {
  pC?: number;
  pB?: number;
  boxModel?: "uniform" | "gaussian";
  delta?: number;
  mu?: number;
  sigma?: number;
  seed?: number;
}

export interface NoiseResult {
  document: CocoDocument;
  changes: ChangeRecord[];
}

export interface MixOptions {
  k?: number;
  applyProb?: number;
  betaFrac?: number;
  lambdaA?: number;
  lambdaB?: number;
  seed?: number;
  workers?: number;
}

export interface PeerCatalog {
  images: { id: number; image: RasterBuffer }[];
  annotations: {
    id: number;
    imageId: number;
    categoryId: number;
    bbox: [number, number, number, number];
  }[];
}

function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "patchmix-client-"));
  try {
    return fn(dir);
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}

function readJson<T>(file: string): T {
  return JSON.parse(fs.readFileSync(file, "utf-8")) as T;
}

function noiseArgs(opts: NoiseOptions): string[] {
  const args: string[] = [];
  if (opts.pC !== undefined) args.push("--pc", String(opts.pC));
  if (opts.pB !== undefined) args.push("--pb", String(opts.pB));
  if (opts.boxModel !== undefined) args.push("--box-model", opts.boxModel);
  if (opts.delta !== undefined) args.push("--delta", String(opts.delta));
  if (opts.mu !== undefined) args.push("--mu", String(opts.mu));
  if (opts.sigma !== undefined) args.push("--sigma", String(opts.sigma));
  args.push("--seed", String(opts.seed ?? 0));
  return args;
}

/** Corrupt labels and/or boxes of a document at the given rates. */
export function injectNoise(doc: CocoDocument, opts: NoiseOptions = {}): NoiseResult {
  return withTempDir((dir) => {
    const annPath = path.join(dir, "in.json");
    const outPath = path.join(dir, "out.json");
    const changesPath = path.join(dir, "changes.json");
    fs.writeFileSync(annPath, JSON.stringify(doc));
    runCli([
      "inject-noise",
      "--ann", annPath,
      "--out", outPath,
      "--changelog", changesPath,
      ...noiseArgs(opts),
    ]);
    return {
      document: readJson<CocoDocument>(outPath),
      changes: readJson<ChangeRecord[]>(changesPath),
    };
  });
}

/** Category noise only; box noise rate is forced to zero. */
export function corruptLabels(
  doc: CocoDocument,
  opts: Omit<NoiseOptions, "pB"> = {},
): NoiseResult {
  return injectNoise(doc, { ...opts, pB: 0 });
}

/** Box noise only; category noise rate is forced to zero. */
export function perturbBoxes(
  doc: CocoDocument,
  opts: Omit<NoiseOptions, "pC"> = {},
): NoiseResult {
  return injectNoise(doc, { ...opts, pC: 0 });
}

function mixArgs(opts: MixOptions): string[] {
  const args: string[] = [];
  if (opts.k !== undefined) args.push("--k", String(opts.k));
  if (opts.applyProb !== undefined) args.push("--apply-prob", String(opts.applyProb));
  if (opts.betaFrac !== undefined) args.push("--beta-frac", String(opts.betaFrac));
  if (opts.lambdaA !== undefined) args.push("--lambda-a", String(opts.lambdaA));
  if (opts.lambdaB !== undefined) args.push("--lambda-b", String(opts.lambdaB));
  args.push("--seed", String(opts.seed ?? 0));
  args.push("--workers", String(opts.workers ?? 1));
  return args;
}

export interface AugmentDatasetResult {
  document: CocoDocument;
  report: AugmentReport;
}

/** Run whole-tree augmentation; outputs land under outRoot exactly as the CLI leaves them. */
export function augmentDataset(
  annPath: string,
  imagesRoot: string,
  outRoot: string,
  opts: MixOptions = {},
): AugmentDatasetResult {
  runCli([
    "augment",
    "--ann", annPath,
    "--images", imagesRoot,
    "--out", outRoot,
    ...mixArgs(opts),
  ]);
  return {
    document: readJson<CocoDocument>(path.join(outRoot, "annotations.json")),
    report: readJson<AugmentReport>(path.join(outRoot, "report.json")),
  };
}

export interface MiniFixture {
  document: CocoDocument;
  /** file name -> encoded PNG bytes, target image first */
  files: Map<string, Buffer>;
  targetFileName: string;
}

/**
 * The staged single-image dataset an augmentImage call runs on: the target
 * buffer plus every peer-catalog image, with category entries synthesized
 * from the annotations. Exposed so equivalence tests can drive the CLI over
 * the identical tree.
 */
export function miniAugmentFixture(
  image: RasterBuffer,
  annotations: AnnotationEntry[],
  catalog: PeerCatalog,
  targetImageId?: number,
): MiniFixture {
  const targetId = targetImageId ?? annotations[0]?.image_id ?? 1;
  for (const ann of annotations) {
    if (ann.image_id !== targetId) {
      throw new Error(
        `annotation ${ann.id} carries image_id ${ann.image_id}, expected ${targetId}`,
      );
    }
  }
  if (catalog.images.some((img) => img.id === targetId)) {
    throw new Error(`peer catalog reuses the target image id ${targetId}`);
  }
  const files = new Map<string, Buffer>();
  const fileName = (id: number) => `img_${id}.png`;
  const target = rasterBuffer(image.width, image.height, image.data);
  files.set(fileName(targetId), encodePng(target));

  const images = [
    { id: targetId, file_name: fileName(targetId), width: target.width, height: target.height },
  ];
  for (const peer of [...catalog.images].sort((a, b) => a.id - b.id)) {
    const buf = rasterBuffer(peer.image.width, peer.image.height, peer.image.data);
    files.set(fileName(peer.id), encodePng(buf));
    images.push({ id: peer.id, file_name: fileName(peer.id), width: buf.width, height: buf.height });
  }

  const docAnnotations: AnnotationEntry[] = [
    ...annotations,
    ...catalog.annotations.map((a) => ({
      id: a.id,
      image_id: a.imageId,
      category_id: a.categoryId,
      bbox: a.bbox,
    })),
  ];
  const categoryIds = [...new Set(docAnnotations.map((a) => a.category_id))].sort(
    (a, b) => a - b,
  );
  const document: CocoDocument = {
    images,
    annotations: docAnnotations,
    categories: categoryIds.map((id) => ({ id, name: `category_${id}` })),
  };
  return { document, files, targetFileName: fileName(targetId) };
}

export interface AugmentImageResult {
  image: RasterBuffer;
  records: MixRecordEntry[];
  selected: boolean;
}

/**
 * Mix-paste one image buffer against a peer catalog.
 *
 * Defaults to applyProb 1 so the buffer is always processed; pass
 * applyProb 0 to verify the unchanged path. Pixel bytes equal a direct CLI
 * run over the same staged fixture with the same seed.
 */
export function augmentImage(
  image: RasterBuffer,
  annotations: AnnotationEntry[],
  catalog: PeerCatalog,
  opts: MixOptions & { targetImageId?: number } = {},
): AugmentImageResult {
  const fixture = miniAugmentFixture(image, annotations, catalog, opts.targetImageId);
  const targetId = fixture.document.images[0].id;
  return withTempDir((dir) => {
    const srcRoot = path.join(dir, "src");
    fs.mkdirSync(srcRoot);
    for (const [name, bytes] of fixture.files) {
      fs.writeFileSync(path.join(srcRoot, name), bytes);
    }
    const annPath = path.join(dir, "doc.json");
    fs.writeFileSync(annPath, JSON.stringify(fixture.document));
    const outRoot = path.join(dir, "out");
    const { document, report } = augmentDataset(annPath, srcRoot, outRoot, {
      ...opts,
      applyProb: opts.applyProb ?? 1,
      workers: 1,
    });
    const entry = report.images.find((img) => img.image_id === targetId);
    if (!entry) {
      throw new Error(`report is missing the target image ${targetId}`);
    }
    const outEntry = document.images.find((img) => img.id === targetId);
    const outFile = path.join(outRoot, "images", outEntry ? outEntry.file_name : "");
    const pixels = decodePng(fs.readFileSync(outFile));
    return { image: pixels, records: entry.records, selected: entry.selected };
  });
}

function syntheticImageId(preds: DetectionRecord[], gts: AnnotationEntry[]): number {
  const ids = new Set<number>([
    ...preds.map((p) => p.image_id),
    ...gts.map((g) => g.image_id),
  ]);
  if (ids.size > 1) {
    throw new Error(
      `predictions and ground truths span several image ids: ${[...ids].join(", ")}`,
    );
  }
  return ids.size ? [...ids][0] : 1;
}

/** Partition a whole detections file against a ground-truth document. */
export function partitionDataset(
  detections: DetectionRecord[],
  groundTruth: CocoDocument,
  iouThr = 0.5,
): PartitionEntry[] {
  return withTempDir((dir) => {
    const detPath = path.join(dir, "dets.json");
    const annPath = path.join(dir, "gt.json");
    const outPath = path.join(dir, "part.json");
    fs.writeFileSync(detPath, JSON.stringify(detections));
    fs.writeFileSync(annPath, JSON.stringify(groundTruth));
    runCli([
      "partition",
      "--dets", detPath,
      "--ann", annPath,
      "--iou-thr", String(iouThr),
      "--out", outPath,
    ]);
    return readJson<PartitionEntry[]>(outPath);
  });
}

/** Partition plus loss breakdown for a single image's predictions. */
export function partitionImage(
  preds: DetectionRecord[],
  gts: AnnotationEntry[],
  iouThr = 0.5,
): PartitionEntry {
  const imageId = syntheticImageId(preds, gts);
  const categoryIds = [...new Set(gts.map((g) => g.category_id))].sort((a, b) => a - b);
  const doc: CocoDocument = {
    images: [{ id: imageId, file_name: `img_${imageId}.png`, width: 1, height: 1 }],
    annotations: gts,
    categories: categoryIds.map((id) => ({ id, name: `category_${id}` })),
  };
  const entries = partitionDataset(preds, doc, iouThr);
  const entry = entries.find((e) => e.image_id === imageId);
  if (!entry) throw new Error(`partition output is missing image ${imageId}`);
  return entry;
}

/** Four-way outcome split of one image's predictions, by prediction index. */
export function partitionOutcomes(
  preds: DetectionRecord[],
  gts: AnnotationEntry[],
  iouThr = 0.5,
): OutcomePartition {
  return partitionImage(preds, gts, iouThr).partition;
}

/** Classification-loss breakdown with the wrong-label set suppressed. */
export function maskedLoss(
  preds: DetectionRecord[],
  gts: AnnotationEntry[],
  iouThr = 0.5,
): LossBreakdown {
  return partitionImage(preds, gts, iouThr).loss;
}
