//! Evaluation metrics, query clustering, cluster titles and kernel
//! diagnostics.

pub mod cluster;
pub mod diagnostics;
pub mod metrics;
pub mod title;

pub use cluster::{
    cluster_queries, default_cluster_count, query_vector, spherical_kmeans, within_cluster_cost, Cluster,
    KMeansOutcome, QueryGroup, UNCLUSTERED_ID,
};
pub use diagnostics::{kernel_diagnostics, KernelDiagnostics, KernelStat};
pub use metrics::{first_relevant_rank, median, median_metric, rank_delta, Judgments, QuerySummary, Rank};
pub use title::{auto_title, is_stopword, STOPWORDS};
