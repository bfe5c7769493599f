//! Process-wide size caps for dense materialization and enumeration.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Once;

use crate::error::{Error, Result};

pub const DEFAULT_DENSE_CAP: usize = 10_000_000;
pub const DEFAULT_SET_FUNCTION_BRUTE_CAP: usize = 16;
pub const DENSE_CAP_ENV: &str = "MOTLAB_DENSE_CAP";

static DENSE_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_DENSE_CAP);
static INIT: Once = Once::new();

fn init_from_env() {
    INIT.call_once(|| {
        if let Some(cap) = std::env::var(DENSE_CAP_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            DENSE_CAP.store(cap, Ordering::Relaxed);
        }
    });
}

/// Current dense-entry cap. Reads `MOTLAB_DENSE_CAP` on first use.
pub fn dense_cap() -> usize {
    init_from_env();
    DENSE_CAP.load(Ordering::Relaxed)
}

pub fn set_dense_cap(cap: usize) {
    init_from_env();
    DENSE_CAP.store(cap, Ordering::Relaxed);
}

/// `n^k` as a float so overflow never hides a cap violation.
pub fn entry_count(n: usize, k: usize) -> f64 {
    (n as f64).powi(k as i32)
}

pub fn check_dense(n: usize, k: usize) -> Result<usize> {
    let entries = entry_count(n, k);
    let cap = dense_cap();
    if entries > cap as f64 {
        return Err(Error::CapExceeded { entries, cap });
    }
    Ok(n.pow(k as u32))
}
