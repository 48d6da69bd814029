/** Wire types matching the toolkit's JSON formats, snake_case as on disk. */

export interface ImageEntry {
  id: number;
  file_name: string;
  width: number;
  height: number;
  [extra: string]: unknown;
}

export interface AnnotationEntry {
  id: number;
  image_id: number;
  category_id: number;
  bbox: [number, number, number, number];
  [extra: string]: unknown;
}

export interface CategoryEntry {
  id: number;
  name: string;
  [extra: string]: unknown;
}

export interface CocoDocument {
  images: ImageEntry[];
  annotations: AnnotationEntry[];
  categories: CategoryEntry[];
  [extra: string]: unknown;
}

export interface DetectionRecord {
  image_id: number;
  bbox: [number, number, number, number];
  /** Category id; null or -1 means background. */
  label: number | null;
  score?: number;
  cls_loss?: number;
}

export interface ChangeRecord {
  kind: "category" | "bbox";
  annotation_id: number;
  old: number | number[];
  new: number | number[];
  deltas?: number[];
}

export interface OutcomePartition {
  neg: number[];
  fb: number[];
  pos: number[];
  pp: number[];
}

export interface LossBreakdown {
  l_bbox: number;
  l_cls_neg: number;
  l_cls_pos: number;
  l_cls_fb: number;
  total: number;
}

export interface PartitionEntry {
  image_id: number;
  partition: OutcomePartition;
  loss: LossBreakdown;
}

export interface MixRecordEntry {
  annotation_id: number;
  peer_annotation_ids: number[];
  lambda: number | null;
  skipped: string | null;
}

export interface AugmentReport {
  total_images: number;
  selected_images: number;
  selected_fraction: number;
  mixed_items: number;
  skipped_items: number;
  per_category: Record<string, { mixed: number; skipped: number }>;
  lambda_stats: { count: number; mean: number | null; min: number | null; max: number | null };
  errors: { image_id: number; file_name: string; error: string }[];
  images: { image_id: number; file_name: string; selected: boolean; records: MixRecordEntry[] }[];
}
