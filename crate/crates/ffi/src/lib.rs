//! C ABI over `pnet_core`.
//!
//! Every fallible function returns a [`PnetStatus`]; on failure a message is
//! available from [`pnet_last_error`] on the same thread until the next
//! failing call. Strings handed out by the library are freed with
//! [`pnet_string_free`], nets with [`pnet_net_free`]. Panics never cross the
//! boundary; they surface as [`PnetStatus::Internal`].
//!
//! Arguments named `semantics`, `reset_mode` and `dialect` take the values
//! of [`PnetSemantics`], [`PnetResetMode`] and [`PnetDialect`] as plain
//! integers; anything else fails with [`PnetStatus::InvalidArgument`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pnet_core::asp::{self, AspDialect, AspLevel, AspVariant};
use pnet_core::engine::{
    enumerate, EngineError, EnumerationConfig, LayeredGraph, Limits, ResetMode, SemanticsMode,
};
use pnet_core::io::{parse_net, TraceDocument, TraceSequence};
use pnet_core::model::{Marking, PetriNet};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnetStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Input text was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The net description did not parse or validate.
    Parse = 3,
    /// An enum argument was out of range or a request is inconsistent.
    InvalidArgument = 4,
    /// A sequence or state limit was reached.
    LimitExceeded = 5,
    /// The result does not fit the output type.
    Overflow = 6,
    /// A bug: the library panicked.
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnetSemantics {
    Set = 0,
    Maximal = 1,
    Interleaved = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnetResetMode {
    Contention = 0,
    Standard = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnetDialect {
    /// `#sum[..]` aggregates and pooled `num/1` literals.
    Legacy = 0,
    /// `#sum{..}` aggregates accepted by current solvers.
    Clingo = 1,
}

/// A validated net with its initial marking. Opaque to C.
pub struct PnetNet {
    net: PetriNet,
    marking: Marking,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(PnetStatus, String);

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let status = match e {
            EngineError::LimitExceeded { .. } => PnetStatus::LimitExceeded,
            EngineError::Overflow { .. } => PnetStatus::Overflow,
            _ => PnetStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PnetStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PnetStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            PnetStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PnetStatus::NullPointer, format!("`{what}` is null"))
}

/// # Safety
/// `p` is null or points to a live `T`.
unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

/// # Safety
/// `p` is null or a valid, writable `T`.
unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    unsafe { p.write(value) };
    Ok(())
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(PnetStatus::Internal, "output contains a nul byte".into()))
}

impl From<PnetSemantics> for SemanticsMode {
    fn from(s: PnetSemantics) -> Self {
        match s {
            PnetSemantics::Set => SemanticsMode::Set,
            PnetSemantics::Maximal => SemanticsMode::Maximal,
            PnetSemantics::Interleaved => SemanticsMode::Interleaved,
        }
    }
}

impl From<PnetResetMode> for ResetMode {
    fn from(m: PnetResetMode) -> Self {
        match m {
            PnetResetMode::Contention => ResetMode::Contention,
            PnetResetMode::Standard => ResetMode::Standard,
        }
    }
}

// C callers can pass any integer for an enum parameter, so enums arrive as
// plain integers and are checked here.
fn semantics(raw: u32) -> Result<SemanticsMode, Failure> {
    match raw {
        0 => Ok(PnetSemantics::Set.into()),
        1 => Ok(PnetSemantics::Maximal.into()),
        2 => Ok(PnetSemantics::Interleaved.into()),
        _ => Err(Failure(PnetStatus::InvalidArgument, format!("unknown semantics {raw}"))),
    }
}

fn reset_mode(raw: u32) -> Result<ResetMode, Failure> {
    match raw {
        0 => Ok(PnetResetMode::Contention.into()),
        1 => Ok(PnetResetMode::Standard.into()),
        _ => Err(Failure(PnetStatus::InvalidArgument, format!("unknown reset mode {raw}"))),
    }
}

fn dialect(raw: u32) -> Result<AspDialect, Failure> {
    match raw {
        0 => Ok(AspDialect::Legacy),
        1 => Ok(AspDialect::Clingo),
        _ => Err(Failure(PnetStatus::InvalidArgument, format!("unknown dialect {raw}"))),
    }
}

fn config(steps: u32, sem: u32, mode: u32) -> Result<EnumerationConfig, Failure> {
    Ok(EnumerationConfig::new(steps as usize, semantics(sem)?).with_reset_mode(reset_mode(mode)?))
}

/// Message for the last failing call on this thread, or null if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn pnet_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a net description (`place`, `trans`, `arc`, ... lines).
///
/// # Safety
/// `text` is a nul-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pnet_net_parse(text: *const c_char, out: *mut *mut PnetNet) -> PnetStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = unsafe { CStr::from_ptr(text) }
            .to_str()
            .map_err(|e| Failure(PnetStatus::InvalidUtf8, e.to_string()))?;
        let parsed = parse_net(text).map_err(|e| Failure(PnetStatus::Parse, e.to_string()))?;
        let handle = Box::new(PnetNet {
            net: parsed.net,
            marking: parsed.marking,
        });
        unsafe { out.write(Box::into_raw(handle)) };
        Ok(())
    })
}

/// Releases a net. Null is ignored.
///
/// # Safety
/// `net` is null or was returned by [`pnet_net_parse`] and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pnet_net_free(net: *mut PnetNet) {
    if !net.is_null() {
        drop(unsafe { Box::from_raw(net) });
    }
}

/// Number of places and transitions.
///
/// # Safety
/// `net` is a live handle; `places` and `transitions` are writable.
#[no_mangle]
pub unsafe extern "C" fn pnet_net_counts(
    net: *const PnetNet,
    places: *mut usize,
    transitions: *mut usize,
) -> PnetStatus {
    guard(|| {
        let n = unsafe { deref(net, "net") }?;
        unsafe { write(places, n.net.place_count(), "places") }?;
        unsafe { write(transitions, n.net.transition_count(), "transitions") }
    })
}

/// Number of execution sequences with firings at steps `0..=steps`.
/// Fails with [`PnetStatus::Overflow`] when the count exceeds `u64`; use
/// [`pnet_count_sequences_decimal`] for exact large counts.
///
/// # Safety
/// `net` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pnet_count_sequences(
    net: *const PnetNet,
    steps: u32,
    semantics: u32,
    reset_mode: u32,
    out: *mut u64,
) -> PnetStatus {
    guard(|| {
        let n = unsafe { deref(net, "net") }?;
        let graph = LayeredGraph::build(&n.net, &n.marking, &config(steps, semantics, reset_mode)?)?;
        let count = graph.sequence_count();
        let small = u64::try_from(&count)
            .map_err(|_| Failure(PnetStatus::Overflow, format!("{count} sequences do not fit in 64 bits")))?;
        unsafe { write(out, small, "out") }
    })
}

/// Like [`pnet_count_sequences`] but writes the exact count as a decimal
/// string to be freed with [`pnet_string_free`].
///
/// # Safety
/// `net` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pnet_count_sequences_decimal(
    net: *const PnetNet,
    steps: u32,
    semantics: u32,
    reset_mode: u32,
    out: *mut *mut c_char,
) -> PnetStatus {
    guard(|| {
        let n = unsafe { deref(net, "net") }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let graph = LayeredGraph::build(&n.net, &n.marking, &config(steps, semantics, reset_mode)?)?;
        let s = to_c_string(graph.sequence_count().to_string())?;
        unsafe { out.write(s) };
        Ok(())
    })
}

/// Every execution sequence as a JSON document
/// `{"semantics", "reset_mode", "k", "sequences": [{"firings", "markings"}]}`.
/// `max_sequences` of 0 means no limit; otherwise exceeding it fails with
/// [`PnetStatus::LimitExceeded`].
///
/// # Safety
/// `net` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pnet_sequences_json(
    net: *const PnetNet,
    steps: u32,
    semantics: u32,
    reset_mode: u32,
    max_sequences: u64,
    out: *mut *mut c_char,
) -> PnetStatus {
    guard(|| {
        let n = unsafe { deref(net, "net") }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let limits = Limits {
            max_sequences: (max_sequences > 0).then_some(max_sequences),
            max_states: None,
        };
        let config = config(steps, semantics, reset_mode)?.with_limits(limits);
        let seqs = enumerate(&n.net, &n.marking, &config)?;
        let doc = TraceDocument {
            semantics: config.semantics,
            reset_mode: config.reset_mode,
            k: config.steps,
            sequences: seqs.iter().map(|s| TraceSequence::from_sequence(&n.net, s)).collect(),
        };
        let json = serde_json::to_string(&doc).map_err(|e| Failure(PnetStatus::Internal, e.to_string()))?;
        let s = to_c_string(json)?;
        unsafe { out.write(s) };
        Ok(())
    })
}

/// A token bound covering every count reachable within `steps` steps.
///
/// # Safety
/// `net` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pnet_suggest_ntok(net: *const PnetNet, steps: u32, out: *mut u64) -> PnetStatus {
    guard(|| {
        let n = unsafe { deref(net, "net") }?;
        unsafe { write(out, asp::suggest_ntok(&n.net, &n.marking, steps as usize), "out") }
    })
}

/// The answer-set program simulating the net, at the lowest encoding level
/// that covers its arc kinds.
///
/// # Safety
/// `net` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pnet_emit_asp(
    net: *const PnetNet,
    steps: u32,
    semantics: u32,
    reset_mode: u32,
    ntok: u64,
    dialect: u32,
    out: *mut *mut c_char,
) -> PnetStatus {
    guard(|| {
        let n = unsafe { deref(net, "net") }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let config = config(steps, semantics, reset_mode)?;
        let variant = AspVariant::new(AspLevel::required_for(&n.net), config.semantics, config.steps, ntok)
            .with_reset_mode(config.reset_mode)
            .with_dialect(self::dialect(dialect)?);
        let program =
            asp::emit(&n.net, &n.marking, &variant).map_err(|e| Failure(PnetStatus::InvalidArgument, e.to_string()))?;
        let s = to_c_string(program.text())?;
        unsafe { out.write(s) };
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or was returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pnet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
