/** Wire types mirroring the /v1 API payloads (schemas/week_graph.schema.json). */

export interface Meta {
  version: number;
  weeks: number[];
  networks: string[];
  clusters: string[];
  granularity: string;
  themes: string[];
  topics: Record<string, string[]>;
  graphs: string[];
}

export interface GroupCell {
  n: number;
  accounts: number;
  pct_of_topic: number;
}

export interface TopicNode {
  key: string;
  size_ratio: number;
  pct_posts_of_week: number;
  mean_posts_per_account: number;
  groups: GroupCell[];
}

export interface GroupNode {
  n: number;
  size_ratio: number;
  account_count: number;
  ratio_to_all_accounts: number;
  topics_covered: number;
}

export interface GraphEdge {
  group_n: number;
  topic_key: string;
  width_ratio: number;
  contributed_texts: number;
}

export interface GraphDocument {
  meta: {
    week: number;
    network: string;
    cluster: string;
    granularity: string;
    version: number;
  };
  topic_nodes: TopicNode[];
  group_nodes: GroupNode[];
  edges: GraphEdge[];
}

export interface WeekIndicators {
  median_intersection_relevance: number;
  text_ratio: number;
  contributor_ratio: number;
  onetopic_share_of_topic: number;
  onetopic_share_of_onetopic_users: number;
  term_shift: number | null;
  term_shift_from_week: number | null;
}

export interface TopicSeries {
  version?: number;
  unique_id: string;
  network: string;
  theme: string | null;
  points: Record<string, WeekIndicators>;
}

export interface ViewState {
  week: number;
  network: string;
  cluster: string;
  granularity: string;
  highlighted: { kind: "topic" | "group" | "edge"; id: string } | null;
}
