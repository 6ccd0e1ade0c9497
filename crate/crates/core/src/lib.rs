//! Related-bug detection: given bug reports and a source tree, find the
//! same-named sibling methods most likely to share a reported defect.

pub mod bug_ingest;
pub mod cli;
pub mod detector;
pub mod diagnostics;
pub mod features;
pub mod lexer;
pub mod lexicon;
pub mod report;
pub mod source;
pub mod substring;
pub mod suffix;
