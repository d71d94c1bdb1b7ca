//! Free cell attachment for dg categories, at a degree cap.
//!
//! Attaching a cell of degree m adds a generator h of degree m+1 with
//! d(h) = z for a chosen degree-m cycle z. Hom complexes of the extension
//! are spanned by alternating words of base basis elements and generators;
//! composition is concatenation followed by composing the adjacent base
//! factors, and the differential is the full Leibniz expansion with Koszul
//! signs. Words are materialized one degree above the cap, then the result
//! is truncated back down so that it is an honest dg category.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::complexes::{homology, induced_on_homology, ChainMap, Complex};
use crate::dgcat::{CompTable, DgCategory, DgFunctor, Elt};
use crate::error::{Error, Result};
use crate::exactlin::{Field, Matrix, Scalar};

/// One cell: a generator of degree m+1 whose differential is the given
/// degree-m cycle. m = -1 attaches a degree-0 generator with zero
/// differential (used for free degree-0 generators).
#[derive(Clone, Debug)]
pub struct CellSpec {
    pub m: i64,
    pub source: usize,
    pub target: usize,
    /// coordinates in hom_base(source,target) at degree m; empty when m = -1
    pub cycle: Vec<Scalar>,
    pub label: String,
}

/// A factor of a basis word. `Base` carries its hom pair so that object
/// chains never have to be re-derived.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Factor {
    Base {
        from: usize,
        to: usize,
        degree: i64,
        index: usize,
    },
    Gen(usize),
}

/// Basis word, stored right to left: factors[0] is applied first. Words
/// alternate base factors (even positions) and generators (odd positions).
pub type Word = Vec<Factor>;

fn factor_degree(f: &Factor, cells: &[CellSpec]) -> i64 {
    match f {
        Factor::Base { degree, .. } => *degree,
        Factor::Gen(c) => cells[*c].m + 1,
    }
}

fn word_label(w: &Word, base: &DgCategory, cells: &[CellSpec]) -> String {
    let mut parts: Vec<String> = Vec::new();
    for f in w.iter().rev() {
        match f {
            Factor::Base {
                from,
                to,
                degree,
                index,
            } => parts.push(base.hom(*from, *to).labels(*degree)[*index].clone()),
            Factor::Gen(c) => parts.push(cells[*c].label.clone()),
        }
    }
    parts.join("*")
}

pub struct CellExtension {
    pub base: Arc<DgCategory>,
    pub cells: Vec<CellSpec>,
    pub cap: i64,
    pub total: Arc<DgCategory>,
    /// per pair: base hom → total hom (length-0 words, then truncation)
    pub inclusion_maps: Vec<ChainMap>,
    /// per cell: (degree m+1, coordinates of the generator in
    /// total.hom(source,target))
    pub gen_elements: Vec<(i64, Vec<Scalar>)>,
    /// per pair: each total basis vector's representative word over the base
    pub provenance: Vec<BTreeMap<(i64, usize), Word>>,
}

/// Words are finite iff no cycle of degree-0 edges (degree-0 base basis
/// elements or degree-0 generators) passes through a generator. The check
/// is conservative: it ignores that some base compositions may vanish.
fn check_finiteness(base: &DgCategory, cells: &[CellSpec]) -> Result<()> {
    let n = base.nobj();
    let mut adj = vec![vec![false; n]; n];
    for (x, y) in base.pairs() {
        if base.hom(x, y).dim(0) > 0 {
            adj[x][y] = true;
        }
    }
    for c in cells {
        if c.m + 1 == 0 {
            adj[c.source][c.target] = true;
        }
    }
    // transitive closure
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if adj[i][k] && adj[k][j] {
                    adj[i][j] = true;
                }
            }
        }
    }
    for c in cells {
        if c.m + 1 == 0 && (c.target == c.source || adj[c.target][c.source]) {
            return Err(Error::NotFinite(format!(
                "degree-0 generator {:?} lies on a degree-0 cycle",
                c.label
            )));
        }
    }
    Ok(())
}

/// All basis words of degree ≤ max_deg, per hom pair, keyed by degree and
/// canonically ordered by (word length, factors).
fn enumerate_words(
    base: &DgCategory,
    cells: &[CellSpec],
    max_deg: i64,
) -> Result<Vec<BTreeMap<i64, Vec<Word>>>> {
    let n = base.nobj();
    if cells.iter().any(|c| c.m + 1 == 0) {
        check_finiteness(base, cells)?;
    }
    let mut all: Vec<BTreeSet<(i64, Word)>> = vec![BTreeSet::new(); n * n];
    let mut frontier: Vec<Vec<(i64, Word)>> = vec![vec![]; n * n];
    for (x, y) in base.pairs() {
        let hom = base.hom(x, y);
        for deg in hom.support() {
            if deg > max_deg {
                continue;
            }
            for i in 0..hom.dim(deg) {
                let w = vec![Factor::Base {
                    from: x,
                    to: y,
                    degree: deg,
                    index: i,
                }];
                frontier[x * n + y].push((deg, w.clone()));
                all[x * n + y].insert((deg, w));
            }
        }
    }
    let limit = cells.len() * (max_deg.max(0) as usize + 2) + 4;
    let mut level = 0usize;
    while frontier.iter().any(|f| !f.is_empty()) {
        level += 1;
        if level > limit {
            return Err(Error::NotFinite(
                "word enumeration exceeded the length bound".into(),
            ));
        }
        let mut next: Vec<Vec<(i64, Word)>> = vec![vec![]; n * n];
        for x in 0..n {
            for (ci, cell) in cells.iter().enumerate() {
                let gd = cell.m + 1;
                for (wdeg, w) in frontier[x * n + cell.source].clone() {
                    for y in 0..n {
                        let bh = base.hom(cell.target, y);
                        for bd in bh.support() {
                            let total = wdeg + gd + bd;
                            if total > max_deg {
                                continue;
                            }
                            for bi in 0..bh.dim(bd) {
                                let mut nw = w.clone();
                                nw.push(Factor::Gen(ci));
                                nw.push(Factor::Base {
                                    from: cell.target,
                                    to: y,
                                    degree: bd,
                                    index: bi,
                                });
                                next[x * n + y].push((total, nw.clone()));
                                all[x * n + y].insert((total, nw));
                            }
                        }
                    }
                }
            }
        }
        frontier = next;
    }
    let mut out = Vec::new();
    for set in all {
        let mut by_deg: BTreeMap<i64, Vec<Word>> = BTreeMap::new();
        for (deg, w) in set {
            by_deg.entry(deg).or_default().push(w);
        }
        for v in by_deg.values_mut() {
            v.sort_by(|a, b| (a.len(), a.as_slice()).cmp(&(b.len(), b.as_slice())));
        }
        out.push(by_deg);
    }
    Ok(out)
}

/// d(w) as coordinates of degree-(deg−1) words: Leibniz over every factor,
/// with sign (−1)^(sum of degrees of factors to the left), where generators
/// are replaced by their attaching cycles and reduced into the neighbors.
fn word_diff(
    base: &DgCategory,
    cells: &[CellSpec],
    w: &Word,
    lookup: &BTreeMap<Word, usize>,
    field: Field,
) -> Vec<(usize, Scalar)> {
    let degs: Vec<i64> = w.iter().map(|f| factor_degree(f, cells)).collect();
    let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
    let mut add = |idx: usize, c: Scalar| {
        let e = acc.entry(idx).or_insert_with(|| field.zero());
        *e = field.add(e, &c);
    };
    for j in 0..w.len() {
        let exp: i64 = degs[j + 1..].iter().sum();
        let sgn = field.from_integer(if exp.rem_euclid(2) == 0 { 1 } else { -1 });
        match &w[j] {
            Factor::Base {
                from,
                to,
                degree,
                index,
            } => {
                let d = base.hom(*from, *to).d(*degree);
                for r in 0..d.rows {
                    let c = d.get(r, *index);
                    if c.is_zero() {
                        continue;
                    }
                    let mut nw = w.clone();
                    nw[j] = Factor::Base {
                        from: *from,
                        to: *to,
                        degree: degree - 1,
                        index: r,
                    };
                    if let Some(&idx) = lookup.get(&nw) {
                        add(idx, field.mul(&sgn, c));
                    }
                }
            }
            Factor::Gen(ci) => {
                let cell = &cells[*ci];
                if cell.m < 0 {
                    continue;
                }
                let Factor::Base {
                    from: rf,
                    degree: rd,
                    index: ri,
                    ..
                } = &w[j - 1]
                else {
                    unreachable!("words alternate")
                };
                let Factor::Base {
                    to: lt,
                    degree: ld,
                    index: li,
                    ..
                } = &w[j + 1]
                else {
                    unreachable!("words alternate")
                };
                let z = Elt {
                    degree: cell.m,
                    coords: cell.cycle.clone(),
                };
                let right = base.basis_elt(*rf, cell.source, (*rd, *ri));
                let zr = base.compose(*rf, cell.source, cell.target, &z, &right);
                let left = base.basis_elt(cell.target, *lt, (*ld, *li));
                let lzr = base.compose(*rf, cell.target, *lt, &left, &zr);
                for (s, c) in lzr.coords.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let mut nw: Word = w[..j - 1].to_vec();
                    nw.push(Factor::Base {
                        from: *rf,
                        to: *lt,
                        degree: rd + cell.m + ld,
                        index: s,
                    });
                    nw.extend_from_slice(&w[j + 2..]);
                    if let Some(&idx) = lookup.get(&nw) {
                        add(idx, field.mul(&sgn, c));
                    }
                }
            }
        }
    }
    acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

/// w2∘w1: concatenate and compose the junction base factors.
fn compose_words(base: &DgCategory, w2: &Word, w1: &Word) -> Vec<(Word, Scalar)> {
    let Factor::Base {
        from: a,
        to: mid,
        degree: rd,
        index: ri,
    } = w1.last().unwrap()
    else {
        unreachable!("words end with base factors")
    };
    let Factor::Base {
        to: b,
        degree: ld,
        index: li,
        ..
    } = &w2[0]
    else {
        unreachable!("words start with base factors")
    };
    let r = base.basis_elt(*a, *mid, (*rd, *ri));
    let l = base.basis_elt(*mid, *b, (*ld, *li));
    let prod = base.compose(*a, *mid, *b, &l, &r);
    let mut out = Vec::new();
    for (s, c) in prod.coords.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut nw: Word = w1[..w1.len() - 1].to_vec();
        nw.push(Factor::Base {
            from: *a,
            to: *b,
            degree: ld + rd,
            index: s,
        });
        nw.extend_from_slice(&w2[1..]);
        out.push((nw, c.clone()));
    }
    out
}

pub fn attach_cells(
    base: &Arc<DgCategory>,
    cells: Vec<CellSpec>,
    cap: i64,
) -> Result<CellExtension> {
    let field = base.field;
    let nobj = base.nobj();
    if !base.is_positively_graded() {
        return Err(Error::CategoryNotPositivelyGraded);
    }
    for c in &cells {
        if c.source >= nobj || c.target >= nobj || c.m < -1 {
            return Err(Error::InvalidCycle(c.label.clone()));
        }
        if c.m + 1 > cap {
            return Err(Error::CapTooSmall {
                cap,
                why: format!("generator {:?} has degree {}", c.label, c.m + 1),
            });
        }
        let dim = base.hom(c.source, c.target).dim(c.m.max(0));
        if c.m >= 0 {
            if c.cycle.len() != dim {
                return Err(Error::InvalidCycle(c.label.clone()));
            }
            let z = Elt {
                degree: c.m,
                coords: c.cycle.clone(),
            };
            if !base.diff(c.source, c.target, &z).is_zero() {
                return Err(Error::InvalidCycle(c.label.clone()));
            }
        } else if !c.cycle.is_empty() {
            return Err(Error::InvalidCycle(c.label.clone()));
        }
    }
    let words = enumerate_words(base, &cells, cap + 1)?;
    // index per pair: word -> (degree, index)
    let mut index: Vec<BTreeMap<Word, usize>> = Vec::new();
    for by_deg in &words {
        let mut m = BTreeMap::new();
        for ws in by_deg.values() {
            for (i, w) in ws.iter().enumerate() {
                m.insert(w.clone(), i);
            }
        }
        index.push(m);
    }
    // complexes with deduplicated labels
    let mut homs = Vec::new();
    let mut label_words: Vec<BTreeMap<(i64, String), Word>> = Vec::new();
    for (pair, by_deg) in words.iter().enumerate() {
        let mut lw = BTreeMap::new();
        if by_deg.is_empty() {
            homs.push(Complex::zero(field));
            label_words.push(lw);
            continue;
        }
        let hi = *by_deg.keys().max().unwrap();
        let mut dims = Vec::new();
        let mut labels = Vec::new();
        let mut diffs = Vec::new();
        for deg in 0..=hi {
            let ws = by_deg.get(&deg).map_or(&[][..], |v| v.as_slice());
            dims.push(ws.len());
            let mut seen: BTreeMap<String, usize> = BTreeMap::new();
            let mut degree_labels = Vec::new();
            for w in ws {
                let mut l = word_label(w, base, &cells);
                let count = seen.entry(l.clone()).or_insert(0);
                if *count > 0 {
                    l = format!("{l}#{count}");
                }
                *count += 1;
                lw.insert((deg, l.clone()), w.clone());
                degree_labels.push(l);
            }
            labels.push(degree_labels);
            let below = by_deg.get(&(deg - 1)).map_or(0, |v| v.len());
            let mut d = Matrix::zero(field, below, ws.len());
            for (col, w) in ws.iter().enumerate() {
                for (row, c) in word_diff(base, &cells, w, &index[pair], field) {
                    d.set(row, col, c);
                }
            }
            diffs.push(d);
        }
        homs.push(Complex::new(field, 0, dims, labels, diffs)?);
        label_words.push(lw);
    }
    // composition tables
    let mut comp = BTreeMap::new();
    for x in 0..nobj {
        for y in 0..nobj {
            for z in 0..nobj {
                let wg = &words[y * nobj + z];
                let wf = &words[x * nobj + y];
                let mut table: CompTable = BTreeMap::new();
                for (dg, gws) in wg {
                    for (df, fws) in wf {
                        if dg + df > cap + 1 {
                            continue;
                        }
                        for (gi, g) in gws.iter().enumerate() {
                            for (fi, f) in fws.iter().enumerate() {
                                let mut val: BTreeMap<usize, Scalar> = BTreeMap::new();
                                for (nw, c) in compose_words(base, g, f) {
                                    if let Some(&idx) = index[x * nobj + z].get(&nw) {
                                        let e =
                                            val.entry(idx).or_insert_with(|| field.zero());
                                        *e = field.add(e, &c);
                                    }
                                }
                                let val: Vec<(usize, Scalar)> = val
                                    .into_iter()
                                    .filter(|(_, c)| !c.is_zero())
                                    .collect();
                                if !val.is_empty() {
                                    table.insert(((*dg, gi), (*df, fi)), val);
                                }
                            }
                        }
                    }
                }
                if !table.is_empty() {
                    comp.insert((x, y, z), table);
                }
            }
        }
    }
    // identities: base identities as length-0 words
    let mut ids = Vec::new();
    for x in 0..nobj {
        let pair = x * nobj + x;
        let dim0 = words[pair].get(&0).map_or(0, |v| v.len());
        let mut coords = vec![field.zero(); dim0];
        for (i, c) in base.id(x).coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let w = vec![Factor::Base {
                from: x,
                to: x,
                degree: 0,
                index: i,
            }];
            coords[index[pair][&w]] = c.clone();
        }
        ids.push(coords);
    }
    let full = Arc::new(DgCategory::new(
        field,
        base.objects.clone(),
        homs,
        comp,
        ids,
    )?);
    let (total, proj) = crate::postnikov::stage(&full, cap)?;
    // inclusion of the base as length-0 words, then truncation
    let mut inclusion_maps = Vec::new();
    for (x, y) in base.pairs() {
        let pair = x * nobj + y;
        let bh = base.hom(x, y);
        let th = total.hom(x, y);
        let mut maps = Vec::new();
        for deg in bh.support() {
            let mut m = Matrix::zero(field, full.hom(x, y).dim(deg), bh.dim(deg));
            for i in 0..bh.dim(deg) {
                let w = vec![Factor::Base {
                    from: x,
                    to: y,
                    degree: deg,
                    index: i,
                }];
                if let Some(&idx) = index[pair].get(&w) {
                    m.set(idx, i, field.one());
                }
            }
            maps.push((deg, proj.map(x, y).f(deg).mul(&m)));
        }
        inclusion_maps.push(ChainMap::new(bh.clone(), th.clone(), maps)?);
    }
    // generator elements: id ⊗ h ⊗ id, truncated
    let mut gen_elements = Vec::new();
    for (ci, c) in cells.iter().enumerate() {
        let gd = c.m + 1;
        let pair = c.source * nobj + c.target;
        let mut coords = vec![field.zero(); full.hom(c.source, c.target).dim(gd)];
        for (i, ai) in base.id(c.source).coords.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in base.id(c.target).coords.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let w = vec![
                    Factor::Base {
                        from: c.source,
                        to: c.source,
                        degree: 0,
                        index: i,
                    },
                    Factor::Gen(ci),
                    Factor::Base {
                        from: c.target,
                        to: c.target,
                        degree: 0,
                        index: j,
                    },
                ];
                if let Some(&idx) = index[pair].get(&w) {
                    coords[idx] = field.mul(bj, ai);
                }
            }
        }
        gen_elements.push((gd, proj.map(c.source, c.target).f(gd).mul_vec(&coords)));
    }
    // provenance: below the cap, basis = words directly; at the cap, the
    // truncation reuses labels of free columns, so recover words by label
    let mut provenance = Vec::new();
    for (pair, by_deg) in words.iter().enumerate() {
        let (x, y) = (pair / nobj, pair % nobj);
        let th = total.hom(x, y);
        let mut p = BTreeMap::new();
        for deg in th.support() {
            for (i, l) in th.labels(deg).iter().enumerate() {
                if deg < cap {
                    p.insert((deg, i), by_deg[&deg][i].clone());
                } else {
                    let w = label_words[pair]
                        .get(&(deg, l.clone()))
                        .ok_or_else(|| Error::Internal("missing truncation label".into()))?
                        .clone();
                    p.insert((deg, i), w);
                }
            }
        }
        provenance.push(p);
    }
    Ok(CellExtension {
        base: base.clone(),
        cells,
        cap,
        total,
        inclusion_maps,
        gen_elements,
        provenance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellKind {
    Sphere,
    Disk,
}

/// The two-object cell categories: Sphere has hom(1,2) a line in degree m,
/// Disk has hom(3,4) the acyclic cone in degrees (m, m+1); the reverse hom
/// is zero and the endomorphisms are identity lines.
pub fn cell_category(field: Field, kind: CellKind, m: i64) -> Result<Arc<DgCategory>> {
    if m < 0 {
        return Err(Error::InvalidCategory("cell degree must be ≥ 0".into()));
    }
    let (names, hom01) = match kind {
        CellKind::Sphere => (
            ("1", "2"),
            Complex::line(field, m, &format!("s{m}")),
        ),
        CellKind::Disk => (("3", "4"), crate::complexes::cone_on_identity(field, m)),
    };
    let homs = vec![
        Complex::line(field, 0, "id1"),
        hom01.clone(),
        Complex::zero(field),
        Complex::line(field, 0, "id2"),
    ];
    let mut comp = BTreeMap::new();
    let unit_table = || -> CompTable {
        let mut t = BTreeMap::new();
        t.insert(((0i64, 0usize), (0i64, 0usize)), vec![(0usize, field.one())]);
        t
    };
    comp.insert((0, 0, 0), unit_table());
    comp.insert((1, 1, 1), unit_table());
    let mut left: CompTable = BTreeMap::new();
    let mut right: CompTable = BTreeMap::new();
    for deg in hom01.support() {
        for i in 0..hom01.dim(deg) {
            left.insert(((0, 0), (deg, i)), vec![(i, field.one())]);
            right.insert(((deg, i), (0, 0)), vec![(i, field.one())]);
        }
    }
    comp.insert((0, 1, 1), left);
    comp.insert((0, 0, 1), right);
    Ok(Arc::new(DgCategory::new(
        field,
        vec![names.0.to_string(), names.1.to_string()],
        homs,
        comp,
        vec![vec![field.one()], vec![field.one()]],
    )?))
}

/// One generator of the bounded model, with enough provenance for the
/// k-invariant: first-sweep cells keep their attaching cycle in the base.
#[derive(Clone, Debug)]
pub struct GenInfo {
    pub m: i64,
    pub source: usize,
    pub target: usize,
    pub label: String,
    /// Some for cells attached in the first sweep (m = n+1): the attaching
    /// cycle as coordinates in the original category
    pub cycle_in_base: Option<Vec<Scalar>>,
    /// (degree, coordinates) of the generator in the final model
    pub element: (i64, Vec<Scalar>),
}

pub struct BoundedBigModel {
    pub stage: i64,
    pub cap: i64,
    pub base: Arc<DgCategory>,
    pub model: Arc<DgCategory>,
    /// base → model (length-0 words through every sweep)
    pub section: DgFunctor,
    /// the truncated stage this model maps onto
    pub small: Arc<DgCategory>,
    pub small_section: DgFunctor,
    /// model → small: truncation on length-0 words, generators to 0
    pub comparison: DgFunctor,
    pub gens: Vec<GenInfo>,
    /// per pair: model basis vector → word over the base category, with
    /// generators referenced by their index in `gens`
    pub provenance: Vec<BTreeMap<(i64, usize), Word>>,
}

/// Sweep degrees n+1 .. cap−1 upward, attaching one cell per homology basis
/// vector at each degree; homology below the current sweep is never
/// disturbed because new generators only live in higher degrees.
pub fn bounded_big_model(a: &Arc<DgCategory>, stage_n: i64, cap: i64) -> Result<BoundedBigModel> {
    let field = a.field;
    let nobj = a.nobj();
    if !a.is_positively_graded() {
        return Err(Error::CategoryNotPositivelyGraded);
    }
    if stage_n < 0 || cap < stage_n + 1 {
        return Err(Error::CapTooSmall {
            cap,
            why: format!("stage {stage_n} needs cap ≥ {}", stage_n + 1),
        });
    }
    for (x, y) in a.pairs() {
        let hi = *a.hom(x, y).support().end();
        if hi > cap {
            return Err(Error::CapTooSmall {
                cap,
                why: format!("hom supported up to degree {hi}"),
            });
        }
    }
    let mut current = a.clone();
    let mut section_maps: Vec<BTreeMap<i64, Matrix>> = a
        .pairs()
        .map(|(x, y)| {
            let mut m = BTreeMap::new();
            for deg in a.hom(x, y).support() {
                m.insert(deg, Matrix::identity(field, a.hom(x, y).dim(deg)));
            }
            m
        })
        .collect();
    let mut provenance: Vec<BTreeMap<(i64, usize), Word>> = a
        .pairs()
        .map(|(x, y)| {
            let mut p = BTreeMap::new();
            for deg in a.hom(x, y).support() {
                for i in 0..a.hom(x, y).dim(deg) {
                    p.insert(
                        (deg, i),
                        vec![Factor::Base {
                            from: x,
                            to: y,
                            degree: deg,
                            index: i,
                        }],
                    );
                }
            }
            p
        })
        .collect();
    let mut gens: Vec<GenInfo> = Vec::new();
    for m in (stage_n + 1)..cap {
        let mut cells = Vec::new();
        for (x, y) in current.pairs() {
            let h = homology(current.hom(x, y));
            if let Some(hd) = h.degree(m) {
                for k in 0..hd.h_dim {
                    cells.push(CellSpec {
                        m,
                        source: x,
                        target: y,
                        cycle: hd.section.column(k),
                        label: format!("h{m}.{x}.{y}.{k}"),
                    });
                }
            }
        }
        if cells.is_empty() {
            continue;
        }
        let first_sweep = m == stage_n + 1;
        let ext = attach_cells(&current, cells, cap)?;
        let offset = gens.len();
        for (pair, maps) in section_maps.iter_mut().enumerate() {
            let (x, y) = (pair / nobj, pair % nobj);
            for (deg, mat) in maps.iter_mut() {
                *mat = ext.inclusion_maps[x * nobj + y].f(*deg).mul(mat);
            }
        }
        for g in gens.iter_mut() {
            let (deg, coords) = &g.element;
            let incl = ext.inclusion_maps[g.source * nobj + g.target].f(*deg);
            g.element = (*deg, incl.mul_vec(coords));
        }
        // flatten new words through the previous provenance
        let mut new_prov = Vec::new();
        for pair in 0..nobj * nobj {
            let mut p = BTreeMap::new();
            for ((deg, i), w) in &ext.provenance[pair] {
                let mut flat: Word = Vec::new();
                for f in w {
                    match f {
                        Factor::Base {
                            from,
                            to,
                            degree,
                            index,
                        } => {
                            let inner = &provenance[from * nobj + to][&(*degree, *index)];
                            flat.extend_from_slice(inner);
                        }
                        Factor::Gen(c) => flat.push(Factor::Gen(offset + c)),
                    }
                }
                p.insert((*deg, *i), flat);
            }
            new_prov.push(p);
        }
        provenance = new_prov;
        for (ci, c) in ext.cells.iter().enumerate() {
            gens.push(GenInfo {
                m: c.m,
                source: c.source,
                target: c.target,
                label: c.label.clone(),
                cycle_in_base: if first_sweep { Some(c.cycle.clone()) } else { None },
                element: ext.gen_elements[ci].clone(),
            });
        }
        current = ext.total.clone();
    }
    let model = current;
    let section_chain_maps = a
        .pairs()
        .map(|(x, y)| {
            let maps: Vec<(i64, Matrix)> = section_maps[x * nobj + y]
                .iter()
                .map(|(d, m)| (*d, m.clone()))
                .collect();
            ChainMap::new(a.hom(x, y).clone(), model.hom(x, y).clone(), maps)
        })
        .collect::<Result<Vec<_>>>()?;
    let section = DgFunctor::new(
        a.clone(),
        model.clone(),
        (0..nobj).collect(),
        section_chain_maps,
    )?;
    let (small, small_section) = crate::postnikov::stage(a, stage_n)?;
    let comparison_maps = model
        .pairs()
        .map(|(x, y)| {
            let mh = model.hom(x, y);
            let sh = small.hom(x, y);
            let mut maps = Vec::new();
            for deg in mh.support() {
                let m = if deg <= stage_n {
                    small_section.map(x, y).f(deg)
                } else {
                    Matrix::zero(field, sh.dim(deg), mh.dim(deg))
                };
                maps.push((deg, m));
            }
            ChainMap::new(mh.clone(), sh.clone(), maps)
        })
        .collect::<Result<Vec<_>>>()?;
    let comparison = DgFunctor::new(
        model.clone(),
        small.clone(),
        (0..nobj).collect(),
        comparison_maps,
    )?;
    Ok(BoundedBigModel {
        stage: stage_n,
        cap,
        base: a.clone(),
        model,
        section,
        small,
        small_section,
        comparison,
        gens,
        provenance,
    })
}

#[derive(Clone, Debug)]
pub struct WindowReport {
    /// homology of the section is an isomorphism in degrees ≤ n
    pub a1: bool,
    /// model homology vanishes in degrees n < i ≤ cap−1
    pub b: bool,
    pub details: Vec<String>,
}

impl WindowReport {
    pub fn ok(&self) -> bool {
        self.a1 && self.b
    }
}

pub fn check_window(mdl: &BoundedBigModel) -> WindowReport {
    let mut a1 = true;
    let mut b = true;
    let mut details = Vec::new();
    for (x, y) in mdl.base.pairs() {
        let m = mdl.section.map(x, y);
        let hs = homology(&m.source);
        let ht = homology(&m.target);
        for i in 0..=mdl.cap {
            if i <= mdl.stage {
                let ind = induced_on_homology(&hs, &ht, m, i);
                if hs.h_dim(i) != ht.h_dim(i) || ind.rank() != hs.h_dim(i) {
                    a1 = false;
                    details.push(format!("A1 fails at ({x},{y}) degree {i}"));
                }
            } else if i < mdl.cap && ht.h_dim(i) != 0 {
                b = false;
                details.push(format!(
                    "H_{i} of the model at ({x},{y}) has dimension {}",
                    ht.h_dim(i)
                ));
            }
        }
    }
    WindowReport { a1, b, details }
}

/// One lifting instance against a degree-m sphere-to-disk square: find c
/// upstairs with d(c) = cycle and F(c) = chain.
pub struct RlpInstance {
    pub x: usize,
    pub y: usize,
    /// degree-m cycle in the source hom
    pub cycle: Elt,
    /// degree-(m+1) chain in the target hom with d(chain) = F(cycle)
    pub chain: Elt,
}

pub fn rlp_solve(f: &DgFunctor, inst: &RlpInstance) -> Result<Option<Elt>> {
    let m = inst.cycle.degree;
    let hom = f.source.hom(inst.x, inst.y);
    let sys = hom.d(m + 1).vcat(&f.map(inst.x, inst.y).f(m + 1));
    let mut rhs = inst.cycle.coords.clone();
    rhs.extend(inst.chain.coords.iter().cloned());
    Ok(sys.solve(&rhs)?.map(|coords| Elt {
        degree: m + 1,
        coords,
    }))
}

/// Batch right-lifting-property check at degree m: the map c ↦ (d c, F c)
/// must cover every compatible pair (cycle upstairs, bounding chain
/// downstairs). Verified per hom pair by a rank comparison.
pub fn rlp_batch(f: &DgFunctor, m: i64) -> Result<bool> {
    let field = f.source.field;
    for (x, y) in f.source.pairs() {
        let (fx, fy) = (f.object_map[x], f.object_map[y]);
        let ah = f.source.hom(x, y);
        let bh = f.target.hom(fx, fy);
        let (da, db) = (ah.dim(m), bh.dim(m + 1));
        let phi = ah.d(m + 1).vcat(&f.map(x, y).f(m + 1));
        // constraints on (z, c) ∈ A_m ⊕ B_{m+1}: d z = 0 and d c = F z
        let top = ah.d(m).hcat(&Matrix::zero(field, ah.dim(m - 1), db));
        let bot = f
            .map(x, y)
            .f(m)
            .scale(&field.from_integer(-1))
            .hcat(&bh.d(m + 1));
        let cons = top.vcat(&bot);
        let w = Matrix::from_columns(field, da + db, &cons.kernel_basis());
        if phi.hcat(&w).rank() != phi.rank() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Rationals
    }

    fn dual_numbers() -> Arc<DgCategory> {
        let field = q();
        let hom = Complex::new(
            field,
            0,
            vec![1, 1],
            vec![vec!["id".into()], vec!["e".into()]],
            vec![Matrix::zero(field, 0, 1), Matrix::zero(field, 1, 1)],
        )
        .unwrap();
        let mut t: CompTable = BTreeMap::new();
        t.insert(((0, 0), (0, 0)), vec![(0, field.one())]);
        t.insert(((0, 0), (1, 0)), vec![(0, field.one())]);
        t.insert(((1, 0), (0, 0)), vec![(0, field.one())]);
        let mut comp = BTreeMap::new();
        comp.insert((0, 0, 0), t);
        Arc::new(
            DgCategory::new(field, vec!["x".into()], vec![hom], comp, vec![vec![field.one()]])
                .unwrap(),
        )
    }

    #[test]
    fn cell_categories() {
        let c0 = cell_category(q(), CellKind::Sphere, 0).unwrap();
        assert_eq!(c0.hom(0, 1).dim(0), 1);
        assert!(c0.validate().is_valid());
        let d1 = cell_category(q(), CellKind::Disk, 0).unwrap();
        assert_eq!(d1.hom(0, 1).dim(0), 1);
        assert_eq!(d1.hom(0, 1).dim(1), 1);
        assert!(d1.hom(0, 1).d(1).get(0, 0).is_one());
        assert!(d1.validate().is_valid());
        let c2 = cell_category(q(), CellKind::Sphere, 2).unwrap();
        assert_eq!(c2.hom(0, 1).dim(2), 1);
        assert!(c2.validate().is_valid());
    }

    #[test]
    fn no_cells_is_identity() {
        let a = dual_numbers();
        let ext = attach_cells(&a, vec![], 3).unwrap();
        assert_eq!(*ext.total, *a);
        for (x, y) in a.pairs() {
            for deg in a.hom(x, y).support() {
                assert_eq!(
                    ext.inclusion_maps[x * a.nobj() + y].f(deg),
                    Matrix::identity(q(), a.hom(x, y).dim(deg))
                );
            }
        }
    }

    #[test]
    fn sphere_pushout_is_disk_shaped() {
        // attach one cell along the degree-1 sphere generator: the hom gets
        // a bounding generator in degree 2 and both H_1 and H_2 vanish
        let c = cell_category(q(), CellKind::Sphere, 1).unwrap();
        let cell = CellSpec {
            m: 1,
            source: 0,
            target: 1,
            cycle: vec![q().one()],
            label: "h".into(),
        };
        let ext = attach_cells(&c, vec![cell], 3).unwrap();
        let hom = ext.total.hom(0, 1);
        assert_eq!(hom.dim(1), 1);
        assert_eq!(hom.dim(2), 1);
        assert!(hom.d(2).get(0, 0).is_one());
        let h = homology(hom);
        assert_eq!(h.h_dim(1), 0);
        assert_eq!(h.h_dim(2), 0);
        assert!(ext.total.validate().is_valid(), "{:?}", ext.total.validate().violations);
        // the generator element has degree 2 and is the single word
        assert_eq!(ext.gen_elements[0].0, 2);
        assert!(ext.gen_elements[0].1[0].is_one());
    }

    #[test]
    fn word_length_filtration_is_closed_under_d() {
        // dual numbers with one cell killing H_1: check that d of length-l
        // words only involves words of length ≤ l
        let a = dual_numbers();
        let cell = CellSpec {
            m: 1,
            source: 0,
            target: 0,
            cycle: vec![q().one()],
            label: "h".into(),
        };
        let ext = attach_cells(&a, vec![cell], 4).unwrap();
        assert!(ext.total.validate().is_valid(), "{:?}", ext.total.validate().violations);
        let hom = ext.total.hom(0, 0);
        for deg in hom.support() {
            let d = hom.d(deg);
            for col in 0..hom.dim(deg) {
                let wl = ext.provenance[0][&(deg, col)].len();
                for row in 0..d.rows {
                    if !d.get(row, col).is_zero() {
                        assert!(ext.provenance[0][&(deg - 1, row)].len() <= wl);
                    }
                }
            }
        }
    }

    #[test]
    fn degree_zero_generator_cycle_is_rejected() {
        let a = dual_numbers();
        let cell = CellSpec {
            m: -1,
            source: 0,
            target: 0,
            cycle: vec![],
            label: "g".into(),
        };
        assert!(matches!(
            attach_cells(&a, vec![cell], 3),
            Err(Error::NotFinite(_))
        ));
    }

    #[test]
    fn bounded_model_trivial_when_no_high_homology() {
        // degree-0 category: nothing to kill at stage 0
        let field = q();
        let hom = Complex::line(field, 0, "id");
        let mut t: CompTable = BTreeMap::new();
        t.insert(((0, 0), (0, 0)), vec![(0, field.one())]);
        let mut comp = BTreeMap::new();
        comp.insert((0, 0, 0), t);
        let a = Arc::new(
            DgCategory::new(field, vec!["x".into()], vec![hom], comp, vec![vec![field.one()]])
                .unwrap(),
        );
        let mdl = bounded_big_model(&a, 0, 3).unwrap();
        assert!(mdl.gens.is_empty());
        assert_eq!(*mdl.model, *a);
        assert!(check_window(&mdl).ok());
    }

    #[test]
    fn bounded_model_kills_window_homology() {
        let a = dual_numbers();
        let mdl = bounded_big_model(&a, 0, 3).unwrap();
        let rep = check_window(&mdl);
        assert!(rep.ok(), "{:?}", rep.details);
        assert_eq!(mdl.gens.len(), 1);
        assert_eq!(mdl.gens[0].m, 1);
        assert!(mdl.gens[0].cycle_in_base.is_some());
        assert!(mdl.model.validate().is_valid());
        // comparison is degreewise surjective and identity on objects
        for (x, y) in mdl.model.pairs() {
            assert!(mdl.comparison.map(x, y).is_degreewise_surjective());
        }
        // triangle: comparison ∘ section = small section
        let comp = mdl.comparison.compose(&mdl.section).unwrap();
        for (x, y) in a.pairs() {
            for deg in a.hom(x, y).support() {
                assert_eq!(comp.map(x, y).f(deg), mdl.small_section.map(x, y).f(deg));
            }
        }
    }

    #[test]
    fn sphere_at_stage_below_kills_generator() {
        // Sphere in degree n+1 at stage n: exactly one cell attached, hom
        // acyclic in the window above n
        let c = cell_category(q(), CellKind::Sphere, 1).unwrap();
        let mdl = bounded_big_model(&c, 0, 4).unwrap();
        assert_eq!(mdl.gens.len(), 1);
        let rep = check_window(&mdl);
        assert!(rep.ok(), "{:?}", rep.details);
        let h = homology(mdl.model.hom(0, 1));
        assert_eq!(h.h_dim(1), 0);
        assert_eq!(h.h_dim(2), 0);
        assert_eq!(h.h_dim(3), 0);
    }

    #[test]
    fn rlp_examples() {
        let a = dual_numbers();
        let idf = DgFunctor::identity(a.clone());
        // boundary instance: z = 0 (the only cycle boundary in degree 0 is 0)
        let inst = RlpInstance {
            x: 0,
            y: 0,
            cycle: Elt::zero(q(), 1, 1),
            chain: Elt::zero(q(), 2, 0),
        };
        assert!(rlp_solve(&idf, &inst).unwrap().is_some());
        assert!(rlp_batch(&idf, 1).unwrap());
        // functor to the terminal category fails RLP at degree 1 because
        // e is a non-bounding cycle
        let t = Arc::new(DgCategory::terminal(q()));
        let maps = a
            .pairs()
            .map(|(x, y)| ChainMap::zero(a.hom(x, y).clone(), Complex::zero(q())))
            .collect();
        let to_t = DgFunctor::new(a.clone(), t, vec![0], maps).unwrap();
        assert!(!rlp_batch(&to_t, 1).unwrap());
        // comparison of a bounded model has RLP above the stage
        let mdl = bounded_big_model(&a, 0, 3).unwrap();
        assert!(rlp_batch(&mdl.comparison, 2).unwrap());
    }
}
