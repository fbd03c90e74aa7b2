//! Net files, trace files and solver output.

mod answers;
mod dsl;
mod trace;

pub use answers::{parse_answer_sets, AnswerFormat, AnswerSetError};
pub use dsl::{
    build_net, parse_document, parse_net, serialize_net, Declaration, DslError, DslErrorKind,
    DslErrors, DslWarning, NetDocument, ParsedNet, Span,
};
pub use trace::{render_text, TraceDocument, TraceSequence, TraceWriter};
