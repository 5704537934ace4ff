//! Dialect-tagged acceptability data construction: URL regions, identifier
//! agreement filtering, tag sampling, and the model input formats.

mod combine;
mod format;
mod pipeline;
mod region;
mod sampler;
mod split;

pub use combine::{combine_langid_region, DropReason, LabeledSentence, LOCALE_BEARING};
pub use format::{format_input, format_training_example, ExampleMeta, FormatMode, TaggedTrainingExample};
pub use pipeline::{build_examples, write_training_file, Document, NanoBuild, NanoConfig, NanoSummary};
pub use region::extract_region_from_url;
pub use sampler::{
    default_tag_universe, load_tag_universe, sample_tag, Polarity, SampledTag, SamplerConfig, TagKind, TagSampler,
};
pub use split::split_sentences;
