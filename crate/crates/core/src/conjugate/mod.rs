//! Conjugate loci: the fields `r_i(u)`, their ordering, and the singularities of `K_i`.

pub mod cusp;
pub mod d4;
pub mod export;
pub mod field;
pub mod locus;
pub mod pair;
pub mod run;

pub use cusp::{count_cusps_2d, cusp_classify, CellSide, CuspCount, CuspEvidence, CuspOptions};
pub use d4::{d4_classify, fit_cone, ConeFit, D4Options, D4Report};
pub use export::{read_samples_json, write_field_csv, write_locus_obj, write_samples_json};
pub use field::{check_ordering, kth_conjugate_check, ConjugateField, FieldOptions, FieldSample, KthReport, OrderingReport};
pub use locus::{conjugate_locus, diameter, expected_label, first_conjugate_locus, ConjugateSample, SingularityLabel};
pub use pair::{degenerate_pair, DegeneratePair, PairOptions};
pub use run::{cusp_summary, run_conjugate, ConjugateRun, CuspSummary, RunOptions, SphereCheck};
