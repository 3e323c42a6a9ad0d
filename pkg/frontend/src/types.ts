// Payload shapes of the annotation service API, verbatim.

export interface Progress {
  judged: number;
  total: number;
}

export interface SessionSummary {
  session_id: string;
  dataset: string;
  k: number;
  seed: number;
  status: "collecting" | "trained";
  progress: Progress;
}

export interface ItemCard {
  id: string;
  title: string;
  description: string;
}

export type NextPair =
  | { done: true }
  | { done: false; pair_index: number; item_a: ItemCard; item_b: ItemCard };

export interface JudgmentAck {
  recorded: boolean;
  pair_index: number;
  y: 1 | -1;
  progress: Progress;
}

export interface SkipAck {
  skipped: boolean;
  pair_index: number;
  progress: Progress;
}

export interface TrainResult {
  status: string;
  judgments_used: number;
  epochs_run: number;
  final_train_loss: number | null;
}

export interface RankingRow {
  id: string;
  score: number;
  rank: number;
}

export interface NewItem {
  id: string;
  title: string;
  description: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
