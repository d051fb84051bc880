//! Experiment protocols: splits, the learner-by-mode matrix, early
//! detection from time slices, the one-page view, and synthetic corpora.

mod experiment;
mod output;
mod plot;
mod protocols;
mod split;
mod synth;

pub use experiment::{
    load_corpus, run_experiment, Cell, CorpusSummary, DataConfig, ExperimentConfig, HorizonCell, ImportanceSummary,
    OnePageCell, Report, SplitConfig, TopicDistribution,
};
pub use output::{read_report, write_matrix_csv, write_outputs};
pub use plot::render_plots;
pub use protocols::{hot_comments, one_page_filter, time_slice};
pub use split::stratified_split;
pub use synth::{generate_synthetic, SyntheticCorpus, SyntheticParams, TreeShape};
