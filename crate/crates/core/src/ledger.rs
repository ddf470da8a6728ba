//! Accounting of user reports, used to check that each user spends their
//! privacy budget at most once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ReportLedger {
    reports: Vec<u32>,
    strict: bool,
}

/// Totals of a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub users: usize,
    /// Users that sent at least one report.
    pub reporting: usize,
    /// Users that were never asked (rounding leftovers).
    pub idle: usize,
    /// Reports beyond the first per user; zero for a private run.
    pub repeated: usize,
}

impl LedgerSummary {
    /// Every user accounted for and no user reported twice.
    pub fn is_single_use(&self) -> bool {
        self.repeated == 0 && self.reporting + self.idle == self.users
    }
}

impl ReportLedger {
    /// A ledger that rejects a second report from any user.
    pub fn new(users: usize) -> Self {
        ReportLedger {
            reports: vec![0; users],
            strict: true,
        }
    }

    /// A ledger that only counts, for non-private test runs that reuse users.
    pub fn permissive(users: usize) -> Self {
        ReportLedger {
            reports: vec![0; users],
            strict: false,
        }
    }

    pub fn record(&mut self, users: &[usize]) -> Result<()> {
        let size = self.reports.len();
        for &u in users {
            let slot = self.reports.get_mut(u).ok_or(Error::OutOfDomain { value: u, size })?;
            if self.strict && *slot > 0 {
                return Err(Error::DoubleReport { user: u });
            }
            *slot += 1;
        }
        Ok(())
    }

    pub fn summary(&self) -> LedgerSummary {
        let reporting = self.reports.iter().filter(|&&c| c > 0).count();
        LedgerSummary {
            users: self.reports.len(),
            reporting,
            idle: self.reports.len() - reporting,
            repeated: self.reports.iter().map(|&c| c.saturating_sub(1) as usize).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_ledger_rejects_reuse() {
        let mut ledger = ReportLedger::new(4);
        ledger.record(&[0, 2]).unwrap();
        ledger.record(&[1]).unwrap();
        assert!(matches!(ledger.record(&[2]), Err(Error::DoubleReport { user: 2 })));
        assert!(ledger.record(&[9]).is_err());
        let s = ledger.summary();
        assert_eq!((s.reporting, s.idle, s.repeated), (3, 1, 0));
        assert!(s.is_single_use());
    }

    #[test]
    fn permissive_ledger_counts_reuse() {
        let mut ledger = ReportLedger::permissive(2);
        ledger.record(&[0, 1]).unwrap();
        ledger.record(&[0, 1]).unwrap();
        let s = ledger.summary();
        assert_eq!(s.repeated, 2);
        assert!(!s.is_single_use());
    }
}
