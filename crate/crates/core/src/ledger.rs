//! Operation accounting.
//!
//! Counts nonscalar multiplications separately from additive work
//! (additions, subtractions, negations) and scalar multiplications
//! (products where one operand is an algorithm constant).  Charges can be
//! attributed to recursion levels via `enter_level`/`exit_level`; level 0
//! is "outside any engine".

use std::fmt;

/// Cost accumulated at one recursion level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LevelCost {
    pub nonscalar: u64,
    pub additive: u64,
    pub scalar_mul: u64,
    /// How many times this level was entered.
    pub entries: u64,
}

impl LevelCost {
    pub fn additive_and_scalar(&self) -> u64 {
        self.additive + self.scalar_mul
    }

    pub fn total(&self) -> u64 {
        self.nonscalar + self.additive + self.scalar_mul
    }
}

/// Single-owner mutable counter set.  One ledger per algorithm invocation;
/// concurrent invocations each own a private ledger (merge afterwards with
/// [`CostLedger::absorb`]).
#[derive(Clone, Debug, Default)]
pub struct CostLedger {
    nonscalar: u64,
    additive: u64,
    scalar_mul: u64,
    negations: u64,
    levels: Vec<LevelCost>,
    stack: Vec<usize>,
    max_level_seen: usize,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    fn level_slot(&mut self) -> &mut LevelCost {
        let level = self.stack.last().copied().unwrap_or(0);
        if self.levels.len() <= level {
            self.levels.resize(level + 1, LevelCost::default());
        }
        &mut self.levels[level]
    }

    /// One product of two input-dependent values.
    pub fn charge_nonscalar(&mut self) {
        self.nonscalar += 1;
        self.level_slot().nonscalar += 1;
    }

    /// One addition or subtraction.
    pub fn charge_additive(&mut self) {
        self.additive += 1;
        self.level_slot().additive += 1;
    }

    /// One sign change.  Counted as an additive operation; kept in a
    /// separate counter so reports can show the total under the other
    /// convention (sign changes free) as well.
    pub fn charge_negation(&mut self) {
        self.negations += 1;
        self.charge_additive();
    }

    /// One product where at least one operand is a field constant.
    pub fn charge_scalar_mul(&mut self) {
        self.scalar_mul += 1;
        self.level_slot().scalar_mul += 1;
    }

    /// Attach subsequent charges to `level` (≥ 1) until the matching
    /// `exit_level`.
    pub fn enter_level(&mut self, level: usize) {
        assert!(level >= 1, "recursion levels start at 1");
        self.stack.push(level);
        if self.levels.len() <= level {
            self.levels.resize(level + 1, LevelCost::default());
        }
        self.levels[level].entries += 1;
        self.max_level_seen = self.max_level_seen.max(level);
    }

    pub fn exit_level(&mut self) {
        self.stack
            .pop()
            .expect("exit_level without matching enter_level");
    }

    pub fn current_level(&self) -> usize {
        self.stack.last().copied().unwrap_or(0)
    }

    pub fn nonscalar(&self) -> u64 {
        self.nonscalar
    }

    /// The additive-and-scalar count: additions, subtractions, negations
    /// and scalar multiplications.
    pub fn additive_and_scalar(&self) -> u64 {
        self.additive + self.scalar_mul
    }

    pub fn additive(&self) -> u64 {
        self.additive
    }

    pub fn scalar_muls(&self) -> u64 {
        self.scalar_mul
    }

    pub fn negations(&self) -> u64 {
        self.negations
    }

    pub fn total(&self) -> u64 {
        self.nonscalar + self.additive_and_scalar()
    }

    /// Deepest level that was entered or charged.
    pub fn depth(&self) -> usize {
        let deepest_charged = self
            .levels
            .iter()
            .enumerate()
            .rev()
            .find(|(_, c)| c.total() > 0)
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.max_level_seen.max(deepest_charged)
    }

    /// Per-level costs, indexed by level (index 0 = charges outside any
    /// engine).
    pub fn per_level(&self) -> &[LevelCost] {
        &self.levels
    }

    pub fn level_cost(&self, level: usize) -> LevelCost {
        self.levels.get(level).copied().unwrap_or_default()
    }

    /// Number of `enter_level(level)` events observed.
    pub fn level_entries(&self, level: usize) -> u64 {
        self.level_cost(level).entries
    }

    /// Fold another ledger's counts into this one (level by level).
    /// Merging sub-ledgers of concurrent sub-computations this way yields
    /// exactly the totals of a sequential run.
    pub fn absorb(&mut self, other: &CostLedger) {
        self.nonscalar += other.nonscalar;
        self.additive += other.additive;
        self.scalar_mul += other.scalar_mul;
        self.negations += other.negations;
        if self.levels.len() < other.levels.len() {
            self.levels.resize(other.levels.len(), LevelCost::default());
        }
        for (slot, o) in self.levels.iter_mut().zip(other.levels.iter()) {
            slot.nonscalar += o.nonscalar;
            slot.additive += o.additive;
            slot.scalar_mul += o.scalar_mul;
            slot.entries += o.entries;
        }
        self.max_level_seen = self.max_level_seen.max(other.max_level_seen);
    }

    /// Summarize against a degree bound `n` (the number of coefficients of
    /// each input polynomial).
    pub fn report(&self, n: u64) -> CostReport {
        assert!(n >= 1, "degree bound must be at least 1");
        let total = self.total();
        let log_n = (n as f64).log2();
        let per_n_log_n = if total == 0 {
            Some(0.0)
        } else if log_n > 0.0 {
            Some(total as f64 / (n as f64 * log_n))
        } else {
            None
        };
        let log_log_n = if log_n > 0.0 { log_n.log2() } else { 0.0 };
        let per_n_log_n_log_log_n = if total == 0 {
            Some(0.0)
        } else if log_log_n > 0.0 {
            Some(total as f64 / (n as f64 * log_n * log_log_n))
        } else {
            None
        };
        let per_level = self
            .levels
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, c)| c.total() > 0 || c.entries > 0)
            .map(|(i, c)| (i, *c))
            .collect();
        CostReport {
            nonscalar: self.nonscalar,
            additive_and_scalar: self.additive_and_scalar(),
            total,
            scalar_muls: self.scalar_mul,
            negations: self.negations,
            depth: self.depth(),
            per_level,
            degree_bound: n,
            per_n_log_n,
            per_n_log_n_log_log_n,
        }
    }
}

/// Summary of one ledger, as reported by the CLI and the benchmark CSV.
#[derive(Clone, Debug)]
pub struct CostReport {
    /// L^m: nonscalar multiplications.
    pub nonscalar: u64,
    /// L^a: additions, subtractions, negations and scalar multiplications.
    pub additive_and_scalar: u64,
    /// L = L^m + L^a.
    pub total: u64,
    /// Scalar multiplications alone (subset of `additive_and_scalar`).
    pub scalar_muls: u64,
    /// Negations alone (subset of `additive_and_scalar`).  Subtract from
    /// the totals to get the convention where sign changes are free.
    pub negations: u64,
    pub depth: usize,
    /// (level, cost) for levels ≥ 1 that saw any activity.
    pub per_level: Vec<(usize, LevelCost)>,
    pub degree_bound: u64,
    /// L / (n·log₂ n); `None` when the denominator vanishes.
    pub per_n_log_n: Option<f64>,
    /// L / (n·log₂ n·log₂ log₂ n); `None` when the denominator vanishes.
    pub per_n_log_n_log_log_n: Option<f64>,
}

impl CostReport {
    pub fn csv_header() -> &'static str {
        "algo,field,n,N,lm,la,l,depth,l_per_nlogn,l_per_nlognloglogn"
    }

    /// One CSV row; `padded_len` is the transform length N used by the
    /// algorithm (0 when not applicable).
    pub fn csv_row(&self, algo: &str, field: &str, padded_len: u64) -> String {
        let fmt_ratio = |r: Option<f64>| match r {
            Some(v) => format!("{:.6}", v),
            None => String::new(),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            algo,
            field,
            self.degree_bound,
            padded_len,
            self.nonscalar,
            self.additive_and_scalar,
            self.total,
            self.depth,
            fmt_ratio(self.per_n_log_n),
            fmt_ratio(self.per_n_log_n_log_log_n),
        )
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "n = {}: L^m = {}, L^a = {} (of which {} scalar muls, {} sign changes), L = {}, depth = {}",
            self.degree_bound,
            self.nonscalar,
            self.additive_and_scalar,
            self.scalar_muls,
            self.negations,
            self.total,
            self.depth
        )?;
        writeln!(
            f,
            "sign changes counted as additive ops; without them L^a = {}",
            self.additive_and_scalar - self.negations
        )?;
        if let Some(r) = self.per_n_log_n {
            writeln!(f, "L / (n log n)          = {:.4}", r)?;
        }
        if let Some(r) = self.per_n_log_n_log_log_n {
            writeln!(f, "L / (n log n log log n) = {:.4}", r)?;
        }
        for (level, c) in &self.per_level {
            writeln!(
                f,
                "  level {}: L^m = {}, L^a = {}, entries = {}",
                level,
                c.nonscalar,
                c.additive_and_scalar(),
                c.entries
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_are_sums_of_levels() {
        let mut ledger = CostLedger::new();
        ledger.enter_level(1);
        ledger.charge_additive();
        ledger.charge_nonscalar();
        ledger.enter_level(2);
        ledger.charge_scalar_mul();
        ledger.charge_nonscalar();
        ledger.exit_level();
        ledger.charge_negation();
        ledger.exit_level();

        assert_eq!(ledger.total(), ledger.nonscalar() + ledger.additive_and_scalar());
        let per_level_total: u64 = ledger.per_level().iter().map(|c| c.total()).sum();
        assert_eq!(per_level_total, ledger.total());
        assert_eq!(ledger.level_cost(1).additive, 2);
        assert_eq!(ledger.level_cost(2).scalar_mul, 1);
        assert_eq!(ledger.depth(), 2);
    }

    #[test]
    fn charges_without_enter_go_to_level_zero() {
        let mut ledger = CostLedger::new();
        ledger.charge_additive();
        assert_eq!(ledger.level_cost(0).additive, 1);
        assert_eq!(ledger.current_level(), 0);
    }

    #[test]
    fn nested_entries_set_depth() {
        let mut ledger = CostLedger::new();
        ledger.enter_level(1);
        ledger.enter_level(2);
        ledger.exit_level();
        ledger.exit_level();
        assert_eq!(ledger.depth(), 2);
        assert_eq!(ledger.level_entries(1), 1);
        assert_eq!(ledger.level_entries(2), 1);
    }

    #[test]
    #[should_panic(expected = "exit_level without matching enter_level")]
    fn unbalanced_exit_panics() {
        let mut ledger = CostLedger::new();
        ledger.exit_level();
    }

    #[test]
    fn empty_report_has_zero_ratios() {
        let ledger = CostLedger::new();
        let report = ledger.report(4);
        assert_eq!(report.total, 0);
        assert_eq!(report.per_n_log_n, Some(0.0));
        assert_eq!(report.per_n_log_n_log_log_n, Some(0.0));
    }

    #[test]
    fn report_sums_counters() {
        let mut ledger = CostLedger::new();
        for _ in 0..3 {
            ledger.charge_nonscalar();
        }
        for _ in 0..4 {
            ledger.charge_additive();
        }
        let report = ledger.report(8);
        assert_eq!(report.nonscalar, 3);
        assert_eq!(report.additive_and_scalar, 4);
        assert_eq!(report.total, 7);
    }

    #[test]
    fn absorb_matches_sequential() {
        let mut a = CostLedger::new();
        a.enter_level(1);
        a.charge_nonscalar();
        a.exit_level();
        let mut b = CostLedger::new();
        b.enter_level(1);
        b.enter_level(2);
        b.charge_additive();
        b.exit_level();
        b.exit_level();
        let mut merged = CostLedger::new();
        merged.absorb(&a);
        merged.absorb(&b);
        assert_eq!(merged.total(), 2);
        assert_eq!(merged.level_cost(1).nonscalar, 1);
        assert_eq!(merged.level_cost(2).additive, 1);
        assert_eq!(merged.level_entries(1), 2);
    }
}
