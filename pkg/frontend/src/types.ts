/** Wire types for the meshsuggest review API, field for field. */

export interface Suggestion {
  heading: string;
  method: string;
  raw_score: number;
  norm_score: number;
  /** (clause text, raw score) provenance pairs, in retrieval order. */
  sources: [string, number][];
  below_cutoff: boolean;
}

export interface FragmentDoc {
  fragment_id: string;
  passthrough: boolean;
  gold_mesh: string[];
  fragment_query: string;
  stripped_query: string | null;
  suggestions: Suggestion[];
  /** Number of suggestions at or above the refinement cutoff. */
  cutoff: number;
  suggestion_error: string | null;
  accepted: string[];
  rejected: string[];
}

export interface RetrievalCounts {
  judged_relevant_retrieved: number;
  judged_irrelevant_retrieved: number;
  unjudged_retrieved: number;
}

export interface ModeMetrics {
  precision: number;
  recall: number;
  f_half: number;
  f1: number;
  f3: number;
}

export type ResidualMode = "lower" | "mle" | "optimistic";

export const RESIDUAL_MODES: ResidualMode[] = ["lower", "mle", "optimistic"];

/** What the server stores on the session after a retrieval run. Counts and
 * metrics are absent when the session has no relevance judgments. */
export interface LastRetrieval {
  query: string;
  retrieved: number;
  counts?: RetrievalCounts;
  mle_fallback?: boolean;
  metrics?: Record<ResidualMode, ModeMetrics>;
}

export interface RetrieveResponse extends LastRetrieval {
  schema_version: number;
  error?: ApiErrorBody;
}

export interface PreviewError {
  message: string;
}

export interface SessionDoc {
  schema_version: number;
  session_id: string;
  topic_id: string | null;
  query: string;
  method: string;
  fragments: FragmentDoc[];
  preview_query: string | null;
  preview_error: PreviewError | null;
  last_retrieval: LastRetrieval | null;
}

export interface QueryResponse {
  schema_version: number;
  query: string;
}

export interface SuggestResponse {
  schema_version: number;
  fragment: string;
  method: string;
  candidates: Suggestion[];
}

export interface SessionExport {
  schema_version: number;
  session_id: string;
  topic_id: string | null;
  query: string;
  method: string;
  decisions: Record<string, { accepted: string[]; rejected: string[] }>;
}

export interface ApiErrorBody {
  message: string;
  position?: number;
  snippet?: string;
}

export type DecisionAction = "accept" | "reject" | "reset";
