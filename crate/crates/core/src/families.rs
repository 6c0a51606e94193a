//! Built-in feedback-function families and their structural predicates.

use crate::error::{Error, Result};
use crate::function::{Anf, FeedbackFunction};
use crate::graph::StateGraph;

/// A named function family. `materialize` turns a spec into a concrete
/// truth table at a given order; every family here is in standard form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilySpec {
    /// f = 0. The prefer-one generator from the all-zero state.
    ConstantZero,
    /// f = 1. The prefer-zero generator from the all-one state.
    ConstantOne,
    /// f = x_{n-1} + 1. Its state graph has the unique cycle (01).
    PreferSame,
    /// f = x_{n-1}. Two loops; joining them gives the prefer-opposite
    /// generator.
    PreferOpposite,
    /// f = x_1 * ... * x_{n-1} + x_k * x_l with 0 < k < l < n.
    Product { k: usize, l: usize },
    /// f = x_1 * ... * x_{n-1} + x_{k_1} * ... * x_{k_t},
    /// 0 < k_1 < ... < k_t < n.
    GeneralizedProduct { ks: Vec<usize> },
    /// f(x_0..x_{n-1}) = h(x_{n-m}..x_{n-1}) for a base function h of
    /// order m < n.
    Lift { base: String, base_order: usize },
    /// x_1 + x_2*x_3, the three-component worked example.
    Example4,
    /// x_{n-3}*x_{n-2} + x_{n-3}*x_{n-1} + x_{n-2}*x_{n-1}: two components
    /// that cannot be joined.
    Example6,
}

impl FamilySpec {
    /// Parses the CLI family syntax. Returns None when `text` is not a
    /// family name (the caller falls back to ANF parsing).
    pub fn parse(text: &str) -> Option<Result<FamilySpec>> {
        let text = text.trim();
        match text {
            "zero" => return Some(Ok(FamilySpec::ConstantZero)),
            "one" => return Some(Ok(FamilySpec::ConstantOne)),
            "prefer-same" => return Some(Ok(FamilySpec::PreferSame)),
            "prefer-opposite" => return Some(Ok(FamilySpec::PreferOpposite)),
            "example4" => return Some(Ok(FamilySpec::Example4)),
            "example6" => return Some(Ok(FamilySpec::Example6)),
            _ => {}
        }
        if let Some(rest) = text.strip_prefix("product:") {
            return Some(parse_product(rest));
        }
        if let Some(rest) = text.strip_prefix("gproduct:") {
            return Some(parse_gproduct(rest));
        }
        if let Some(rest) = text.strip_prefix("lift:") {
            return Some(parse_lift(rest));
        }
        None
    }

    pub fn materialize(&self, n: usize) -> Result<FeedbackFunction> {
        let f = match self {
            FamilySpec::ConstantZero => FeedbackFunction::from_anf(Anf::zero(), n)?,
            FamilySpec::ConstantOne => FeedbackFunction::from_anf(Anf::one(), n)?,
            FamilySpec::PreferSame => {
                require(n >= 2, "prefer-same needs order >= 2")?;
                let mut anf = Anf::one();
                anf.toggle_term(&[n - 1]);
                FeedbackFunction::from_anf(anf, n)?
            }
            FamilySpec::PreferOpposite => {
                require(n >= 2, "prefer-opposite needs order >= 2")?;
                let mut anf = Anf::zero();
                anf.toggle_term(&[n - 1]);
                FeedbackFunction::from_anf(anf, n)?
            }
            FamilySpec::Product { k, l } => {
                require(0 < *k && k < l && *l < n, "product needs 0 < k < l < n")?;
                let mut anf = Anf::zero();
                anf.toggle_term(&all_vars(n));
                anf.toggle_term(&[*k, *l]);
                FeedbackFunction::from_anf(anf, n)?
            }
            FamilySpec::GeneralizedProduct { ks } => {
                require(
                    !ks.is_empty()
                        && ks[0] > 0
                        && ks.windows(2).all(|w| w[0] < w[1])
                        && *ks.last().unwrap() < n,
                    "gproduct needs 0 < k1 < ... < kt < n",
                )?;
                let mut anf = Anf::zero();
                anf.toggle_term(&all_vars(n));
                anf.toggle_term(ks);
                FeedbackFunction::from_anf(anf, n)?
            }
            FamilySpec::Lift { base, base_order } => {
                let m = *base_order;
                require(m < n, "lift needs base order m < n")?;
                let h = FeedbackFunction::parse(base, m)?;
                lift(&h, n)?
            }
            FamilySpec::Example4 => {
                require(n >= 4, "example4 needs order >= 4")?;
                FeedbackFunction::parse("x1 + x2*x3", n)?
            }
            FamilySpec::Example6 => {
                require(n >= 4, "example6 needs order >= 4")?;
                let mut anf = Anf::zero();
                anf.toggle_term(&[n - 3, n - 2]);
                anf.toggle_term(&[n - 3, n - 1]);
                anf.toggle_term(&[n - 2, n - 1]);
                FeedbackFunction::from_anf(anf, n)?
            }
        };
        debug_assert!(f.is_standard());
        Ok(f)
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::FamilyParameter(msg.into()))
    }
}

fn all_vars(n: usize) -> Vec<usize> {
    (1..n).collect()
}

fn parse_product(rest: &str) -> Result<FamilySpec> {
    let parts: Vec<&str> = rest.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::FamilyParameter("product takes two indices: k,l".into()));
    }
    let k = parse_index(parts[0])?;
    let l = parse_index(parts[1])?;
    Ok(FamilySpec::Product { k, l })
}

fn parse_gproduct(rest: &str) -> Result<FamilySpec> {
    let ks: Result<Vec<usize>> = rest.split(',').map(parse_index).collect();
    Ok(FamilySpec::GeneralizedProduct { ks: ks? })
}

fn parse_lift(rest: &str) -> Result<FamilySpec> {
    let (base, order) = rest
        .rsplit_once('@')
        .ok_or_else(|| Error::FamilyParameter("lift syntax is lift:<anf>@<order>".into()))?;
    let base = base.trim().trim_matches('"').trim_matches('\'').to_string();
    let base_order = parse_index(order)?;
    Ok(FamilySpec::Lift { base, base_order })
}

fn parse_index(text: &str) -> Result<usize> {
    text.trim()
        .parse()
        .map_err(|_| Error::FamilyParameter(format!("bad integer '{}'", text.trim())))
}

/// Shifts a base function of order m onto the last m variables of an
/// order-n function: f(x_0..x_{n-1}) = h(x_{n-m}..x_{n-1}).
pub fn lift(h: &FeedbackFunction, n: usize) -> Result<FeedbackFunction> {
    let m = h.order();
    if m >= n {
        return Err(Error::FamilyParameter(format!(
            "lift target order {n} must exceed base order {m}"
        )));
    }
    if let Some(anf) = h.source_form() {
        FeedbackFunction::from_anf(anf.shift_variables(n - m), n)
    } else {
        let low = (1usize << m) - 1;
        let table = (0..1usize << n)
            .map(|v| h.truth_table()[v & low])
            .collect();
        FeedbackFunction::from_truth_table(n, table)
    }
}

/// gcd(n-k, l-k) = 1 is exactly the condition under which the product
/// family has a single cycle (the loop at the all-zero state).
pub fn product_unique_loop(n: usize, k: usize, l: usize) -> bool {
    gcd(n - k, l - k) == 1
}

/// The generalized condition: gcd(n-k_1, k_2-k_1, ..., k_t-k_1) = 1.
pub fn generalized_product_unique_loop(n: usize, ks: &[usize]) -> bool {
    assert!(!ks.is_empty());
    let mut g = n - ks[0];
    for &k in &ks[1..] {
        g = gcd(g, k - ks[0]);
    }
    g == 1
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// One base cycle paired with its lifted component.
#[derive(Debug, Clone)]
pub struct LiftPair {
    /// The base cycle, as m-stage state values in successor order.
    pub base_cycle: Vec<u32>,
    /// The component of the lifted graph whose cycle projects onto it.
    pub component: usize,
    /// States per rooted tree hanging off the lifted cycle (2^(n-m)).
    pub tree_size: usize,
    /// Leaves per rooted tree (2^(n-m-1)).
    pub leaves_per_root: usize,
}

/// The cycle-to-component correspondence between a nonsingular base
/// function of order m and its lift to order n. Verifies the per-root tree
/// size and leaf count and the leaf shape (each leaf ends with its root's
/// first m bits).
pub fn base_cycles_of_lift(h: &FeedbackFunction, n: usize) -> Result<Vec<LiftPair>> {
    if !h.is_nonsingular() {
        return Err(Error::NonsingularRequired);
    }
    let m = h.order();
    let lifted = lift(h, n)?;
    let base_graph = StateGraph::build(h)?;
    let g = StateGraph::build(&lifted)?;
    if base_graph.components().len() != g.components().len() {
        return Err(Error::FamilyParameter(
            "cycle counts of base and lift differ".into(),
        ));
    }

    // Walk every lifted state to its cycle entry point.
    let size = g.state_count();
    let mut entry = vec![u32::MAX; size];
    for v in 0..size as u32 {
        if entry[v as usize] != u32::MAX {
            continue;
        }
        let mut path = vec![v];
        let mut w = v;
        while !g.is_on_cycle(w) && entry[w as usize] == u32::MAX {
            w = g.successor(w);
            path.push(w);
        }
        let e = if g.is_on_cycle(w) { w } else { entry[w as usize] };
        for &p in &path {
            if !g.is_on_cycle(p) {
                entry[p as usize] = e;
            } else {
                entry[p as usize] = p;
            }
        }
    }
    let mut tree_sizes = vec![0usize; size];
    let mut leaf_counts = vec![0usize; size];
    for v in 0..size as u32 {
        tree_sizes[entry[v as usize] as usize] += 1;
        if g.is_leaf(v) {
            leaf_counts[entry[v as usize] as usize] += 1;
        }
    }

    let low_mask = (1u32 << m) - 1;
    let expected_tree = 1usize << (n - m);
    let expected_leaves = 1usize << (n - m - 1);
    let mut out = Vec::new();
    for comp in g.components() {
        // Project the lifted cycle onto the base by taking the last m bits.
        let projected: std::collections::BTreeSet<u32> =
            comp.cycle.iter().map(|&v| v & low_mask).collect();
        let base_comp = base_graph
            .components()
            .iter()
            .find(|c| {
                c.cycle.len() == comp.cycle.len()
                    && c.cycle.iter().all(|s| projected.contains(s))
            })
            .ok_or_else(|| {
                Error::FamilyParameter("no base cycle matches a lifted component".into())
            })?;
        for &root in &comp.cycle {
            if tree_sizes[root as usize] != expected_tree
                || leaf_counts[root as usize] != expected_leaves
            {
                return Err(Error::FamilyParameter(
                    "per-root tree shape does not match the lift structure".into(),
                ));
            }
        }
        // Leaf shape: the last m bits of a leaf are the first m bits of its
        // root.
        for v in 0..size as u32 {
            if g.component_of(v) == comp.id && g.is_leaf(v) {
                let root = entry[v as usize];
                let root_first_m = root >> (n - m);
                if v & low_mask != root_first_m {
                    return Err(Error::FamilyParameter(
                        "leaf does not end with its root's first bits".into(),
                    ));
                }
            }
        }
        out.push(LiftPair {
            base_cycle: base_comp.cycle.clone(),
            component: comp.id,
            tree_size: expected_tree,
            leaves_per_root: expected_leaves,
        });
    }
    Ok(out)
}

/// Resolves a CLI function spec: a family name first, an ANF expression
/// otherwise.
pub fn parse_spec(text: &str, n: usize) -> Result<FeedbackFunction> {
    match FamilySpec::parse(text) {
        Some(spec) => spec?.materialize(n),
        None => FeedbackFunction::parse(text, n),
    }
}
