//! Obstruction theory for lifting a functor from H₀ of the target up the
//! small tower: obstruction classes, their vanishing test, stagewise
//! lifting, the full rigidification loop, and an independent brute-force
//! oracle over prime fields.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cells::{attach_cells, BoundedBigModel, CellSpec, Factor, Word};
use crate::complexes::{homology, Complex};
use crate::dgcat::{CompTable, DgCategory, DgFunctor, Elt};
use crate::error::{Error, Result};
use crate::exactlin::{vec_add, vec_scale, Field, Matrix, Scalar};
use crate::postnikov::{small_tower, Tower};
use crate::sqzero::{gamma, Bimodule, Derivation};

pub const ORACLE_BUDGET_ENV: &str = "DGPOST_ORACLE_BUDGET";
pub const ORACLE_BUDGET_DEFAULT: u128 = 1 << 16;
const MAX_LINEARIZE_ROUNDS: usize = 8;

fn oracle_budget() -> u128 {
    std::env::var(ORACLE_BUDGET_ENV)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(ORACLE_BUDGET_DEFAULT)
}

/// One generator of a semi-free category: an arrow of the given degree
/// whose differential is a linear combination of composable words in
/// generators. A word lists generator indices in application order
/// (word[0] is applied first); the empty word is the identity.
#[derive(Clone, Debug)]
pub struct GenSpec {
    pub source: usize,
    pub target: usize,
    pub degree: i64,
    pub label: String,
    pub diff: Vec<(Scalar, Vec<usize>)>,
}

/// A materialized semi-free dg category, truncated at `cap`.
pub struct SemiFree {
    pub field: Field,
    pub objects: Vec<String>,
    pub gens: Vec<GenSpec>,
    pub cap: i64,
    pub cat: Arc<DgCategory>,
    /// per generator: (degree, coordinates in cat.hom(source,target))
    pub gen_elements: Vec<(i64, Vec<Scalar>)>,
    /// per pair: each basis vector's word over the discrete base, with
    /// generators referenced by their index in `gens`
    pub provenance: Vec<BTreeMap<(i64, usize), Word>>,
}

pub(crate) fn discrete(field: Field, objects: &[String]) -> Result<Arc<DgCategory>> {
    let n = objects.len();
    let mut homs = Vec::new();
    for x in 0..n {
        for y in 0..n {
            homs.push(if x == y {
                Complex::line(field, 0, "id")
            } else {
                Complex::zero(field)
            });
        }
    }
    let mut comp = BTreeMap::new();
    for x in 0..n {
        let mut t: CompTable = BTreeMap::new();
        t.insert(((0, 0), (0, 0)), vec![(0, field.one())]);
        comp.insert((x, x, x), t);
    }
    let ids = vec![vec![field.one()]; n];
    Ok(Arc::new(DgCategory::new(
        field,
        objects.to_vec(),
        homs,
        comp,
        ids,
    )?))
}

/// Evaluate the differential polynomial of generator `g` in `cat`, using
/// the given element of `cat` for each generator index.
fn eval_diff(
    cat: &DgCategory,
    object_map: &[usize],
    gens: &[GenSpec],
    values: &BTreeMap<usize, Elt>,
    g: &GenSpec,
) -> Elt {
    let field = cat.field;
    let deg = g.degree - 1;
    let from = object_map[g.source];
    let to = object_map[g.target];
    let mut out = Elt::zero(field, deg, cat.hom(from, to).dim(deg));
    for (coeff, word) in &g.diff {
        let term = if word.is_empty() {
            cat.id(from)
        } else {
            let mut acc = values[&word[0]].clone();
            let mut cur_to = object_map[gens[word[0]].target];
            for j in &word[1..] {
                let next_to = object_map[gens[*j].target];
                acc = cat.compose(from, cur_to, next_to, &values[j], &acc);
                cur_to = next_to;
            }
            acc
        };
        out.coords = vec_add(field, &out.coords, &vec_scale(field, coeff, &term.coords));
    }
    out
}

/// Materialize a finite semi-free presentation as a dg category truncated
/// at `cap`, by attaching the generators degree by degree.
pub fn semi_free(
    field: Field,
    objects: Vec<String>,
    gens: Vec<GenSpec>,
    cap: i64,
) -> Result<SemiFree> {
    let nobj = objects.len();
    let mut labels = BTreeSet::new();
    let mut max_deg = 0;
    for (j, g) in gens.iter().enumerate() {
        if g.source >= nobj || g.target >= nobj {
            return Err(Error::InvalidCategory(format!(
                "generator {:?} references an unknown object",
                g.label
            )));
        }
        if g.degree < 0 {
            return Err(Error::InvalidCategory(format!(
                "generator {:?} has negative degree",
                g.label
            )));
        }
        if g.degree > cap {
            return Err(Error::CapTooSmall {
                cap,
                why: format!("generator {:?} has degree {}", g.label, g.degree),
            });
        }
        if g.degree == 0 && !g.diff.is_empty() {
            return Err(Error::InvalidCategory(format!(
                "degree-0 generator {:?} must have zero differential",
                g.label
            )));
        }
        if !labels.insert(g.label.clone()) {
            return Err(Error::InvalidCategory(format!(
                "duplicate generator label {:?}",
                g.label
            )));
        }
        for (_, word) in &g.diff {
            if word.is_empty() {
                if g.source != g.target || g.degree != 1 {
                    return Err(Error::InvalidCategory(format!(
                        "identity term in d({}) needs an endomorphism of degree 1",
                        g.label
                    )));
                }
                continue;
            }
            let mut cur = g.source;
            let mut deg_sum = 0;
            for k in word {
                let f = gens.get(*k).ok_or_else(|| {
                    Error::InvalidCategory(format!("d({}) references unknown generator", g.label))
                })?;
                if f.source != cur {
                    return Err(Error::InvalidCategory(format!(
                        "non-composable word in d({})",
                        g.label
                    )));
                }
                cur = f.target;
                deg_sum += f.degree;
            }
            if cur != g.target || deg_sum != g.degree - 1 {
                return Err(Error::InvalidCategory(format!(
                    "word in d({}) has wrong endpoints or degree",
                    g.label
                )));
            }
        }
        max_deg = max_deg.max(g.degree);
        let _ = j;
    }
    let mut current = discrete(field, &objects)?;
    let identity_map: Vec<usize> = (0..nobj).collect();
    let mut provenance: Vec<BTreeMap<(i64, usize), Word>> = (0..nobj * nobj)
        .map(|pair| {
            let (x, y) = (pair / nobj, pair % nobj);
            let mut p = BTreeMap::new();
            if x == y {
                p.insert(
                    (0, 0),
                    vec![Factor::Base {
                        from: x,
                        to: y,
                        degree: 0,
                        index: 0,
                    }],
                );
            }
            p
        })
        .collect();
    let mut elements: BTreeMap<usize, Elt> = BTreeMap::new();
    let mut global_of_local: Vec<Vec<usize>> = Vec::new();
    for k in 0..=max_deg {
        let batch: Vec<usize> = (0..gens.len()).filter(|j| gens[*j].degree == k).collect();
        if batch.is_empty() {
            continue;
        }
        let cells: Vec<CellSpec> = batch
            .iter()
            .map(|j| {
                let g = &gens[*j];
                let cycle = if k == 0 {
                    Vec::new()
                } else {
                    eval_diff(&current, &identity_map, &gens, &elements, g).coords
                };
                CellSpec {
                    m: k - 1,
                    source: g.source,
                    target: g.target,
                    cycle,
                    label: g.label.clone(),
                }
            })
            .collect();
        let ext = attach_cells(&current, cells, cap)?;
        for (j, e) in elements.iter_mut() {
            let g = &gens[*j];
            let incl = ext.inclusion_maps[g.source * nobj + g.target].f(e.degree);
            e.coords = incl.mul_vec(&e.coords);
        }
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
                        } => flat.extend_from_slice(&provenance[from * nobj + to][&(*degree, *index)]),
                        Factor::Gen(c) => flat.push(Factor::Gen(batch[*c])),
                    }
                }
                p.insert((*deg, *i), flat);
            }
            new_prov.push(p);
        }
        provenance = new_prov;
        for (local, j) in batch.iter().enumerate() {
            let (deg, coords) = ext.gen_elements[local].clone();
            elements.insert(*j, Elt { degree: deg, coords });
        }
        global_of_local.push(batch);
        current = ext.total.clone();
    }
    let gen_elements = (0..gens.len())
        .map(|j| {
            let e = &elements[&j];
            (e.degree, e.coords.clone())
        })
        .collect();
    Ok(SemiFree {
        field,
        objects,
        gens,
        cap,
        cat: current,
        gen_elements,
        provenance,
    })
}

impl SemiFree {
    pub fn gens_of_degree(&self, k: i64) -> Vec<usize> {
        (0..self.gens.len())
            .filter(|j| self.gens[*j].degree == k)
            .collect()
    }

    /// The value of a functor determined by `values` on one basis vector.
    fn eval_word(
        &self,
        target: &DgCategory,
        object_map: &[usize],
        values: &BTreeMap<usize, Elt>,
        word: &Word,
    ) -> Elt {
        let mut acc: Option<(usize, Elt)> = None;
        let mut from = 0usize;
        for f in word {
            let (wf, wt, e) = match f {
                Factor::Base { from, to, .. } => {
                    (*from, *to, target.id(object_map[*from]))
                }
                Factor::Gen(j) => (
                    self.gens[*j].source,
                    self.gens[*j].target,
                    values[j].clone(),
                ),
            };
            acc = Some(match acc {
                None => {
                    from = wf;
                    (wt, e)
                }
                Some((mid, prev)) => {
                    debug_assert_eq!(mid, wf);
                    (
                        wt,
                        target.compose(object_map[from], object_map[mid], object_map[wt], &e, &prev),
                    )
                }
            });
        }
        acc.expect("provenance words are nonempty").1
    }
}

/// Build the dg functor determined by a value for every generator,
/// extending multiplicatively along the word basis. Fully validated.
pub fn functor_from_gen_values(
    b: &SemiFree,
    target: &Arc<DgCategory>,
    object_map: &[usize],
    values: &BTreeMap<usize, Elt>,
) -> Result<DgFunctor> {
    let field = b.field;
    let nobj = b.objects.len();
    for j in 0..b.gens.len() {
        if !values.contains_key(&j) {
            return Err(Error::InvalidFunctor(format!(
                "no value for generator {:?}",
                b.gens[j].label
            )));
        }
    }
    let mut maps = Vec::new();
    for (x, y) in b.cat.pairs() {
        let bh = b.cat.hom(x, y);
        let th = target.hom(object_map[x], object_map[y]);
        let mut cm = Vec::new();
        for deg in bh.support() {
            let rows = th.dim(deg);
            let mut m = Matrix::zero(field, rows, bh.dim(deg));
            if rows > 0 {
                for idx in 0..bh.dim(deg) {
                    let word = &b.provenance[x * nobj + y][&(deg, idx)];
                    let v = b.eval_word(target, object_map, values, word);
                    for (r, c) in v.coords.iter().enumerate() {
                        m.set(r, idx, c.clone());
                    }
                }
            }
            cm.push((deg, m));
        }
        maps.push(crate::complexes::ChainMap::new(bh.clone(), th.clone(), cm)?);
    }
    DgFunctor::new(b.cat.clone(), target.clone(), object_map.to_vec(), maps)
}

/// A lifting problem: a semi-free source, a positively graded target
/// supported in [0, cap], and a functor from the source to H₀ of the
/// target given by its values on degree-0 generators.
pub struct LiftingProblem {
    pub target: Arc<DgCategory>,
    pub semifree: SemiFree,
    pub object_map: Vec<usize>,
    /// per degree-0 generator: coordinates in H₀(target)(Fx,Fy)
    pub f0: BTreeMap<usize, Vec<Scalar>>,
    /// top degree of the target's support
    pub cap: i64,
    pub stage_zero: Arc<DgCategory>,
    pub f0_functor: DgFunctor,
}

impl LiftingProblem {
    pub fn new(
        target: Arc<DgCategory>,
        objects: Vec<String>,
        gens: Vec<GenSpec>,
        object_map: Vec<usize>,
        f0: BTreeMap<usize, Vec<Scalar>>,
    ) -> Result<LiftingProblem> {
        if !target.is_positively_graded() {
            return Err(Error::CategoryNotPositivelyGraded);
        }
        if object_map.len() != objects.len() || object_map.iter().any(|&o| o >= target.nobj()) {
            return Err(Error::InvalidFunctor("bad object map".into()));
        }
        let mut cap = 0;
        for (x, y) in target.pairs() {
            cap = cap.max(*target.hom(x, y).support().end());
        }
        let semifree = semi_free(target.field, objects, gens, cap + 1)?;
        let (stage_zero, _) = crate::postnikov::stage(&target, 0)?;
        let mut values = BTreeMap::new();
        for (j, g) in semifree.gens.iter().enumerate() {
            let (fx, fy) = (object_map[g.source], object_map[g.target]);
            if g.degree == 0 {
                let coords = f0.get(&j).ok_or_else(|| {
                    Error::InvalidFunctor(format!("no H₀ value for generator {:?}", g.label))
                })?;
                if coords.len() != stage_zero.hom(fx, fy).dim(0) {
                    return Err(Error::DimensionMismatch(format!(
                        "H₀ value for generator {:?}",
                        g.label
                    )));
                }
                values.insert(
                    j,
                    Elt {
                        degree: 0,
                        coords: coords.clone(),
                    },
                );
            } else {
                values.insert(
                    j,
                    Elt::zero(target.field, g.degree, stage_zero.hom(fx, fy).dim(g.degree)),
                );
            }
        }
        for j in f0.keys() {
            if semifree.gens.get(*j).map(|g| g.degree) != Some(0) {
                return Err(Error::InvalidFunctor(
                    "H₀ values must be indexed by degree-0 generators".into(),
                ));
            }
        }
        let f0_functor = functor_from_gen_values(&semifree, &stage_zero, &object_map, &values)?;
        Ok(LiftingProblem {
            target,
            semifree,
            object_map,
            f0,
            cap,
            stage_zero,
            f0_functor,
        })
    }
}

/// Lift a stage functor through the trivial fibration from the bounded
/// model: one joint linear solve per generator, in increasing degree. The
/// seed varies each solution inside the solution space's kernel.
pub fn lift_over_trivial_fibration(
    b: &SemiFree,
    mdl: &BoundedBigModel,
    f_n: &DgFunctor,
    object_map: &[usize],
    seed: u64,
) -> Result<DgFunctor> {
    let field = b.field;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..b.gens.len()).collect();
    order.sort_by_key(|j| (b.gens[*j].degree, *j));
    let mut values: BTreeMap<usize, Elt> = BTreeMap::new();
    for j in order {
        let g = &b.gens[j];
        let k = g.degree;
        let (fx, fy) = (object_map[g.source], object_map[g.target]);
        let mh = mdl.model.hom(fx, fy);
        let rhs1 = eval_diff(&mdl.model, object_map, &b.gens, &values, g);
        if mh.dim(k) == 0 {
            if !rhs1.is_zero() {
                return Err(Error::Internal(
                    "lift target vanishes but the differential constraint does not".into(),
                ));
            }
            values.insert(j, Elt::zero(field, k, 0));
            continue;
        }
        let (bx, by) = (g.source, g.target);
        let fng = Elt {
            degree: k,
            coords: f_n.map(bx, by).f(k).mul_vec(&b.gen_elements[j].1),
        };
        let a = mh.d(k).vcat(&mdl.comparison.map(fx, fy).f(k));
        let mut rhs = rhs1.coords.clone();
        rhs.extend(fng.coords.clone());
        let mut v = a
            .solve(&rhs)?
            .ok_or_else(|| Error::Internal("trivial fibration lift solve failed".into()))?;
        if seed != 0 {
            for kvec in a.kernel_basis() {
                let c = match field {
                    Field::Rationals => field.from_integer(rng.gen_range(-2i64..=2)),
                    Field::Prime(p) => {
                        let r: u64 = rng.gen_range(0..p);
                        field.from_integer(r as i64)
                    }
                };
                v = vec_add(field, &v, &vec_scale(field, &c, &kvec));
            }
        }
        values.insert(j, Elt { degree: k, coords: v });
    }
    let f_tilde = functor_from_gen_values(b, &mdl.model, object_map, &values)?;
    let down = mdl.comparison.compose(&f_tilde)?;
    if !functors_equal(&down, f_n) {
        return Err(Error::Internal("lift does not project back to its input".into()));
    }
    Ok(f_tilde)
}

pub fn functors_equal(f: &DgFunctor, g: &DgFunctor) -> bool {
    if f.object_map != g.object_map || *f.source != *g.source {
        return false;
    }
    for (x, y) in f.source.pairs() {
        for deg in f.source.hom(x, y).support() {
            if f.map(x, y).f(deg) != g.map(x, y).f(deg) {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VanishingVerdict {
    Vanishes,
    DoesNotVanish,
    Undecided,
}

pub struct ObstructionClass {
    pub stage: i64,
    /// the representative derivation, extended to all degree-(n+2) chains
    pub derivation: Derivation,
    /// its values on degree-(n+2) generators (what the vanishing test uses)
    pub gen_values: BTreeMap<usize, Elt>,
    pub verdict: VanishingVerdict,
    /// coboundary datum: values on degree-(n+1) generators
    pub witness: Option<BTreeMap<usize, Elt>>,
    pub certificate: Option<String>,
}

fn small_value(f_n: &DgFunctor, b: &SemiFree, j: usize) -> Elt {
    let g = &b.gens[j];
    Elt {
        degree: g.degree,
        coords: f_n
            .map(g.source, g.target)
            .f(g.degree)
            .mul_vec(&b.gen_elements[j].1),
    }
}

/// Product of the stage images of a run of degree-0 factors (generator
/// indices), `from` and `to` being source-category objects.
fn degree_zero_run(
    small: &DgCategory,
    f_n: &DgFunctor,
    b: &SemiFree,
    object_map: &[usize],
    run: &[usize],
    from: usize,
) -> Elt {
    let mut acc = small.id(object_map[from]);
    let mut cur = from;
    for j in run {
        let g = &b.gens[*j];
        let v = small_value(f_n, b, *j);
        acc = small.compose(
            object_map[from],
            object_map[cur],
            object_map[g.target],
            &v,
            &acc,
        );
        cur = g.target;
    }
    acc
}

/// Decide whether the derivation given on degree-(n+2) generators is the
/// coboundary of a generator assignment H on degree-(n+1) generators,
/// extended by the Leibniz rule through the stage actions. One linear
/// system; the witness is H.
pub fn vanishing_test(
    p: &LiftingProblem,
    n: i64,
    bimodule: &Bimodule,
    f_n: &DgFunctor,
    d_on_gens: &BTreeMap<usize, Elt>,
) -> Result<(VanishingVerdict, Option<BTreeMap<usize, Elt>>, Option<String>)> {
    let b = &p.semifree;
    let field = b.field;
    let small = &bimodule.over;
    let omap = &p.object_map;
    let unknowns: Vec<usize> = b.gens_of_degree(n + 1);
    let mut offset = BTreeMap::new();
    let mut total = 0usize;
    for h in &unknowns {
        let g = &b.gens[*h];
        let dim = bimodule.hom(omap[g.source], omap[g.target]).dim(n + 2);
        offset.insert(*h, (total, dim));
        total += dim;
    }
    let equations: Vec<usize> = b.gens_of_degree(n + 2);
    let mut rows_list: Vec<Matrix> = Vec::new();
    let mut rhs: Vec<Scalar> = Vec::new();
    for gi in &equations {
        let g = &b.gens[*gi];
        let mdim = bimodule.hom(omap[g.source], omap[g.target]).dim(n + 2);
        let mut block = Matrix::zero(field, mdim, total);
        for (coeff, word) in &g.diff {
            for (slot, hj) in word.iter().enumerate() {
                if b.gens[*hj].degree != n + 1 {
                    continue;
                }
                if word
                    .iter()
                    .enumerate()
                    .any(|(s, f)| s != slot && b.gens[*f].degree != 0)
                {
                    continue;
                }
                let h = &b.gens[*hj];
                let right = degree_zero_run(small, f_n, b, omap, &word[..slot], g.source);
                let left = degree_zero_run(small, f_n, b, omap, &word[slot + 1..], h.target);
                let (o0, hs, ht, o3) = (
                    omap[g.source],
                    omap[h.source],
                    omap[h.target],
                    omap[g.target],
                );
                let hdim = bimodule.hom(hs, ht).dim(n + 2);
                let (off, _) = offset[hj];
                for c in 0..hdim {
                    let mut e = Elt::zero(field, n + 2, hdim);
                    e.coords[c] = field.one();
                    let m1 = bimodule.act_right(o0, hs, ht, &e, &right);
                    let m2 = bimodule.act_left(o0, ht, o3, &left, &m1);
                    for (r, val) in m2.coords.iter().enumerate() {
                        let cur = block.get(r, off + c).clone();
                        block.set(r, off + c, field.add(&cur, &field.mul(coeff, val)));
                    }
                }
            }
        }
        rows_list.push(block);
        let d = d_on_gens
            .get(gi)
            .cloned()
            .unwrap_or_else(|| Elt::zero(field, n + 2, mdim));
        rhs.extend(d.coords);
    }
    let system = rows_list
        .into_iter()
        .fold(Matrix::zero(field, 0, total), |acc, m| acc.vcat(&m));
    match system.solve(&rhs)? {
        Some(sol) => {
            let mut witness = BTreeMap::new();
            for h in &unknowns {
                let (off, dim) = offset[h];
                witness.insert(
                    *h,
                    Elt {
                        degree: n + 2,
                        coords: sol[off..off + dim].to_vec(),
                    },
                );
            }
            Ok((VanishingVerdict::Vanishes, Some(witness), None))
        }
        None => Ok((
            VanishingVerdict::DoesNotVanish,
            None,
            Some(format!(
                "coboundary system is inconsistent: rank {} vs augmented rank exceeds it",
                system.rank()
            )),
        )),
    }
}

/// Extend generator values of a derivation to all degree-(n+2) chains by
/// the Leibniz rule (only words with one degree-(n+2) generator and
/// degree-0 companions contribute).
fn extend_derivation(
    p: &LiftingProblem,
    n: i64,
    bimodule: &Bimodule,
    f_n: &DgFunctor,
    d_on_gens: &BTreeMap<usize, Elt>,
) -> Derivation {
    let b = &p.semifree;
    let field = b.field;
    let nobj = b.objects.len();
    let omap = &p.object_map;
    let small = &bimodule.over;
    let mut maps = Vec::new();
    for (x, y) in b.cat.pairs() {
        let dim = b.cat.hom(x, y).dim(n + 2);
        let mdim = bimodule.hom(omap[x], omap[y]).dim(n + 2);
        let mut m = Matrix::zero(field, mdim, dim);
        for idx in 0..dim {
            let word = &b.provenance[x * nobj + y][&(n + 2, idx)];
            let genrun: Vec<usize> = word
                .iter()
                .filter_map(|f| match f {
                    Factor::Gen(j) => Some(*j),
                    Factor::Base { .. } => None,
                })
                .collect();
            for (slot, j) in genrun.iter().enumerate() {
                if b.gens[*j].degree != n + 2 {
                    continue;
                }
                if genrun
                    .iter()
                    .enumerate()
                    .any(|(s, f)| s != slot && b.gens[*f].degree != 0)
                {
                    continue;
                }
                let h = &b.gens[*j];
                let right = degree_zero_run(small, f_n, b, omap, &genrun[..slot], x);
                let left = degree_zero_run(small, f_n, b, omap, &genrun[slot + 1..], h.target);
                let (o0, hs, ht, o3) = (omap[x], omap[h.source], omap[h.target], omap[y]);
                let dv = match d_on_gens.get(j) {
                    Some(e) => e.clone(),
                    None => continue,
                };
                let m1 = bimodule.act_right(o0, hs, ht, &dv, &right);
                let m2 = bimodule.act_left(o0, ht, o3, &left, &m1);
                for (r, val) in m2.coords.iter().enumerate() {
                    let cur = m.get(r, idx).clone();
                    m.set(r, idx, field.add(&cur, val));
                }
            }
        }
        maps.push(m);
    }
    Derivation::new(n + 2, maps)
}

/// The obstruction to lifting a stage-n functor one stage up: the
/// M-component of the k-invariant composed with a chosen lift through the
/// trivial fibration, with the vanishing verdict.
pub fn obstruction_class(
    p: &LiftingProblem,
    n: i64,
    f_n: &DgFunctor,
    seed: u64,
) -> Result<ObstructionClass> {
    let a = &p.target;
    let field = a.field;
    let b = &p.semifree;
    let h_trivial = a
        .pairs()
        .all(|(x, y)| homology(a.hom(x, y)).h_dim(n + 1) == 0);
    if h_trivial {
        let maps = b
            .cat
            .pairs()
            .map(|(x, y)| Matrix::zero(field, 0, b.cat.hom(x, y).dim(n + 2)))
            .collect();
        let mut witness = BTreeMap::new();
        for h in b.gens_of_degree(n + 1) {
            witness.insert(h, Elt::zero(field, n + 2, 0));
        }
        return Ok(ObstructionClass {
            stage: n,
            derivation: Derivation::new(n + 2, maps),
            gen_values: BTreeMap::new(),
            verdict: VanishingVerdict::Vanishes,
            witness: Some(witness),
            certificate: None,
        });
    }
    let cap = p.cap.max(n + 2);
    let mdl = crate::cells::bounded_big_model(a, n, cap)?;
    let k = gamma(&mdl)?;
    let f_tilde = lift_over_trivial_fibration(b, &mdl, f_n, &p.object_map, seed)?;
    let nobj = a.nobj();
    let mut gen_values = BTreeMap::new();
    for j in b.gens_of_degree(n + 2) {
        let g = &b.gens[j];
        let (fx, fy) = (p.object_map[g.source], p.object_map[g.target]);
        let v = f_tilde
            .map(g.source, g.target)
            .f(n + 2)
            .mul_vec(&b.gen_elements[j].1);
        gen_values.insert(
            j,
            Elt {
                degree: n + 2,
                coords: k.m_component[fx * nobj + fy].mul_vec(&v),
            },
        );
    }
    let derivation = extend_derivation(p, n, &k.bimodule, f_n, &gen_values);
    let (verdict, witness, certificate) = vanishing_test(p, n, &k.bimodule, f_n, &gen_values)?;
    Ok(ObstructionClass {
        stage: n,
        derivation,
        gen_values,
        verdict,
        witness,
        certificate,
    })
}

pub enum StageOutcome {
    Lifted {
        functor: DgFunctor,
        obstruction: ObstructionClass,
    },
    NoLift(ObstructionClass),
    Undecided {
        obstruction: ObstructionClass,
        why: String,
    },
}

/// A first-order value: a constant element plus a linear dependence on the
/// global correction vector.
struct LinVal {
    c: Elt,
    l: Matrix,
}

fn lin_compose(cat: &DgCategory, x: usize, y: usize, z: usize, g: &LinVal, f: &LinVal) -> LinVal {
    let c = cat.compose(x, y, z, &g.c, &f.c);
    let n = g.l.cols;
    let mut l = Matrix::zero(cat.field, c.coords.len(), n);
    for col in 0..n {
        let gf = cat.compose(
            x,
            y,
            z,
            &g.c,
            &Elt {
                degree: f.c.degree,
                coords: f.l.column(col),
            },
        );
        let fg = cat.compose(
            x,
            y,
            z,
            &Elt {
                degree: g.c.degree,
                coords: g.l.column(col),
            },
            &f.c,
        );
        for r in 0..l.rows {
            l.set(r, col, cat.field.add(&gf.coords[r], &fg.coords[r]));
        }
    }
    LinVal { c, l }
}

fn lin_eval_diff(
    cat: &DgCategory,
    object_map: &[usize],
    gens: &[GenSpec],
    vals: &BTreeMap<usize, LinVal>,
    g: &GenSpec,
    n_unknowns: usize,
) -> LinVal {
    let field = cat.field;
    let deg = g.degree - 1;
    let from = object_map[g.source];
    let to = object_map[g.target];
    let dim = cat.hom(from, to).dim(deg);
    let mut out = LinVal {
        c: Elt::zero(field, deg, dim),
        l: Matrix::zero(field, dim, n_unknowns),
    };
    for (coeff, word) in &g.diff {
        let term = if word.is_empty() {
            LinVal {
                c: cat.id(from),
                l: Matrix::zero(field, cat.hom(from, from).dim(0), n_unknowns),
            }
        } else {
            let mut acc = LinVal {
                c: vals[&word[0]].c.clone(),
                l: vals[&word[0]].l.clone(),
            };
            let mut cur = object_map[gens[word[0]].target];
            for j in &word[1..] {
                let next = object_map[gens[*j].target];
                acc = lin_compose(cat, from, cur, next, &vals[j], &acc);
                cur = next;
            }
            acc
        };
        out.c.coords = vec_add(field, &out.c.coords, &vec_scale(field, coeff, &term.c.coords));
        for r in 0..out.l.rows {
            for cix in 0..n_unknowns {
                let cur = out.l.get(r, cix).clone();
                out.l
                    .set(r, cix, field.add(&cur, &field.mul(coeff, term.l.get(r, cix))));
            }
        }
    }
    out
}

/// Lift a stage-n functor to stage n+1. Greedy per-generator solves with a
/// bounded linearized correction loop; over a prime field an exhaustive
/// oracle is the last resort, and an exact disagreement between the
/// vanishing verdict and solvability is a hard internal error.
pub fn stage_lift(
    p: &LiftingProblem,
    tower: &Tower,
    n: i64,
    f_n: &DgFunctor,
    seed: u64,
) -> Result<StageOutcome> {
    let obstruction = obstruction_class(p, n, f_n, seed)?;
    if obstruction.verdict == VanishingVerdict::DoesNotVanish {
        return Ok(StageOutcome::NoLift(obstruction));
    }
    let b = &p.semifree;
    let field = b.field;
    let omap = &p.object_map;
    let upper = &tower.stages[(n + 1) as usize];
    let trans = &tower.transitions[n as usize];

    // base assignment: forced below n, transition preimages at n, zero above
    let mut values: BTreeMap<usize, Elt> = BTreeMap::new();
    let mut order: Vec<usize> = (0..b.gens.len()).collect();
    order.sort_by_key(|j| (b.gens[*j].degree, *j));
    for j in &order {
        let g = &b.gens[*j];
        let k = g.degree;
        let (fx, fy) = (omap[g.source], omap[g.target]);
        let uh = upper.hom(fx, fy);
        if k > n {
            values.insert(*j, Elt::zero(field, k, uh.dim(k)));
            continue;
        }
        let fng = small_value(f_n, b, *j);
        let rhs1 = eval_diff(upper, omap, &b.gens, &values, g);
        let a = uh.d(k).vcat(&trans.map(fx, fy).f(k));
        let mut rhs = rhs1.coords.clone();
        rhs.extend(fng.coords);
        let v = a
            .solve(&rhs)?
            .ok_or_else(|| Error::Internal("transition preimage solve failed".into()))?;
        values.insert(*j, Elt { degree: k, coords: v });
    }

    // correction space: stage-n gens move inside ker(d) ∩ ker(transition),
    // stage-(n+1) gens move freely
    let deg_n: Vec<usize> = b.gens_of_degree(n);
    let deg_n1: Vec<usize> = b.gens_of_degree(n + 1);
    let deg_n2: Vec<usize> = b.gens_of_degree(n + 2);
    let mut kernels: BTreeMap<usize, Matrix> = BTreeMap::new();
    let mut offsets: BTreeMap<usize, usize> = BTreeMap::new();
    let mut total = 0usize;
    for j in &deg_n {
        let g = &b.gens[*j];
        let (fx, fy) = (omap[g.source], omap[g.target]);
        let uh = upper.hom(fx, fy);
        let stacked = uh.d(n).vcat(&trans.map(fx, fy).f(n));
        let kb = Matrix::from_columns(field, uh.dim(n), &stacked.kernel_basis());
        offsets.insert(*j, total);
        total += kb.cols;
        kernels.insert(*j, kb);
    }
    for j in &deg_n1 {
        let g = &b.gens[*j];
        let (fx, fy) = (omap[g.source], omap[g.target]);
        let dim = upper.hom(fx, fy).dim(n + 1);
        offsets.insert(*j, total);
        total += dim;
        kernels.insert(*j, Matrix::identity(field, dim));
    }

    let residuals_ok = |values: &BTreeMap<usize, Elt>| -> bool {
        for j in deg_n1.iter().chain(deg_n2.iter()) {
            let g = &b.gens[*j];
            let (fx, fy) = (omap[g.source], omap[g.target]);
            let want = eval_diff(upper, omap, &b.gens, values, g);
            let have = Elt {
                degree: g.degree - 1,
                coords: upper.hom(fx, fy).d(g.degree).mul_vec(&values[j].coords),
            };
            if want != have {
                return false;
            }
        }
        true
    };

    let mut solved = residuals_ok(&values);
    if !solved {
        for _round in 0..MAX_LINEARIZE_ROUNDS {
            // first-order values for every generator
            let mut lin: BTreeMap<usize, LinVal> = BTreeMap::new();
            for (j, v) in &values {
                let l = match kernels.get(j) {
                    Some(kb) => {
                        let off = offsets[j];
                        let mut m = Matrix::zero(field, v.coords.len(), total);
                        for c in 0..kb.cols {
                            for r in 0..kb.rows {
                                m.set(r, off + c, kb.get(r, c).clone());
                            }
                        }
                        m
                    }
                    None => Matrix::zero(field, v.coords.len(), total),
                };
                lin.insert(*j, LinVal { c: v.clone(), l });
            }
            let mut rows = Matrix::zero(field, 0, total);
            let mut rhs: Vec<Scalar> = Vec::new();
            for j in &deg_n1 {
                let g = &b.gens[*j];
                let (fx, fy) = (omap[g.source], omap[g.target]);
                let d = upper.hom(fx, fy).d(n + 1);
                let ev = lin_eval_diff(upper, omap, &b.gens, &lin, g, total);
                // d·(v + δ) = const + L·δ  ⇒  (d·E − L)·δ = const − d·v
                let de = d.mul(&lin[j].l);
                let mut block = Matrix::zero(field, d.rows, total);
                for r in 0..d.rows {
                    for c in 0..total {
                        block.set(r, c, field.sub(de.get(r, c), ev.l.get(r, c)));
                    }
                }
                rows = rows.vcat(&block);
                let dv = d.mul_vec(&values[j].coords);
                for r in 0..d.rows {
                    rhs.push(field.sub(&ev.c.coords[r], &dv[r]));
                }
            }
            for j in &deg_n2 {
                let g = &b.gens[*j];
                let ev = lin_eval_diff(upper, omap, &b.gens, &lin, g, total);
                // 0 = const + L·δ
                let mut block = Matrix::zero(field, ev.c.coords.len(), total);
                for r in 0..block.rows {
                    for c in 0..total {
                        block.set(r, c, field.neg(ev.l.get(r, c)));
                    }
                }
                rows = rows.vcat(&block);
                rhs.extend(ev.c.coords);
            }
            let Some(delta) = rows.solve(&rhs)? else {
                break;
            };
            if delta.iter().all(|c| c.is_zero()) {
                break;
            }
            for j in deg_n.iter().chain(deg_n1.iter()) {
                let off = offsets[j];
                let kb = &kernels[j];
                let step = kb.mul_vec(&delta[off..off + kb.cols]);
                let v = values.get_mut(j).unwrap();
                v.coords = vec_add(field, &v.coords, &step);
            }
            if residuals_ok(&values) {
                solved = true;
                break;
            }
        }
    }

    if !solved {
        match brute_force_lift_oracle(p, tower, n, f_n) {
            Ok(Some(assignment)) => {
                values = assignment;
                solved = true;
            }
            Ok(None) => {
                return Err(Error::Internal(
                    "obstruction vanishes but exhaustive search finds no lift".into(),
                ));
            }
            Err(Error::OracleBudget(need, have)) => {
                return Ok(StageOutcome::Undecided {
                    obstruction,
                    why: format!("correction loop stalled; oracle budget {need} > {have}"),
                });
            }
            Err(Error::InvalidCategory(_)) => {
                return Ok(StageOutcome::Undecided {
                    obstruction,
                    why: "correction loop stalled and no oracle over this field".into(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    debug_assert!(solved);
    let functor = functor_from_gen_values(b, upper, omap, &values)?;
    let down = trans.compose(&functor)?;
    if !functors_equal(&down, f_n) {
        return Err(Error::Internal("stage lift does not restrict to its input".into()));
    }
    Ok(StageOutcome::Lifted {
        functor,
        obstruction,
    })
}

/// Exhaustive search for a stage-(n+1) lift over a prime field: enumerate
/// the transition fibers of every generator value and check the
/// differential constraints exactly. Never guesses: exceeding the budget
/// is an error, not a verdict.
pub fn brute_force_lift_oracle(
    p: &LiftingProblem,
    tower: &Tower,
    n: i64,
    f_n: &DgFunctor,
) -> Result<Option<BTreeMap<usize, Elt>>> {
    let b = &p.semifree;
    let field = b.field;
    let Some(order) = field.order() else {
        return Err(Error::InvalidCategory(
            "brute-force oracle requires a prime field".into(),
        ));
    };
    let omap = &p.object_map;
    let upper = &tower.stages[(n + 1) as usize];
    let trans = &tower.transitions[n as usize];
    let budget = oracle_budget();
    let mut particular: BTreeMap<usize, Vec<Scalar>> = BTreeMap::new();
    let mut kernels: Vec<(usize, Matrix)> = Vec::new();
    let mut count: u128 = 1;
    for (j, g) in b.gens.iter().enumerate() {
        let k = g.degree;
        let (fx, fy) = (omap[g.source], omap[g.target]);
        let dim = upper.hom(fx, fy).dim(k);
        if k > n + 1 || dim == 0 {
            particular.insert(j, vec![field.zero(); dim]);
            continue;
        }
        let fng = small_value(f_n, b, j);
        let t = trans.map(fx, fy).f(k);
        let v0 = t
            .solve(&fng.coords)?
            .ok_or_else(|| Error::Internal("transition not surjective".into()))?;
        let kb = Matrix::from_columns(field, dim, &t.kernel_basis());
        for _ in 0..kb.cols {
            count = count.saturating_mul(order as u128);
            if count > budget {
                return Err(Error::OracleBudget(count, budget));
            }
        }
        particular.insert(j, v0);
        if kb.cols > 0 {
            kernels.push((j, kb));
        }
    }
    let digits_total: usize = kernels.iter().map(|(_, kb)| kb.cols).sum();
    let mut digits = vec![0u64; digits_total];
    loop {
        // assemble and test
        let mut values: BTreeMap<usize, Elt> = BTreeMap::new();
        let mut pos = 0usize;
        for (j, g) in b.gens.iter().enumerate() {
            let mut coords = particular[&j].clone();
            if let Some((_, kb)) = kernels.iter().find(|(jj, _)| *jj == j) {
                for c in 0..kb.cols {
                    let s = field.from_integer(digits[pos + c] as i64);
                    coords = vec_add(field, &coords, &vec_scale(field, &s, &kb.column(c)));
                }
                pos += kb.cols;
            }
            values.insert(
                j,
                Elt {
                    degree: g.degree,
                    coords,
                },
            );
        }
        let mut ok = true;
        for (j, g) in b.gens.iter().enumerate() {
            if g.degree > n + 2 {
                continue;
            }
            let (fx, fy) = (omap[g.source], omap[g.target]);
            let want = eval_diff(upper, omap, &b.gens, &values, g);
            let have = upper.hom(fx, fy).d(g.degree).mul_vec(&values[&j].coords);
            if want.coords != have {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Some(values));
        }
        // next odometer state
        let mut carry = true;
        for d in digits.iter_mut() {
            *d += 1;
            if *d < order {
                carry = false;
                break;
            }
            *d = 0;
        }
        if carry {
            return Ok(None);
        }
    }
}

pub struct StageLog {
    pub stage: i64,
    pub verdict: VanishingVerdict,
}

pub struct RigidifyOutcome {
    /// the assembled lift into the target, when every stage lifts
    pub lift: Option<DgFunctor>,
    pub failed: Option<ObstructionClass>,
    pub undecided: Option<(i64, String)>,
    pub log: Vec<StageLog>,
    /// τ₌₀ ∘ F = F₀ exactly (always true when lift is Some)
    pub triangle_ok: bool,
}

/// Run the whole loop: lift stage by stage up the small tower, then read
/// the limit off the top stage and verify the defining triangle exactly.
pub fn rigidify(p: &LiftingProblem, seed: u64) -> Result<RigidifyOutcome> {
    let a = &p.target;
    let cap = p.cap;
    let tower = small_tower(a, cap)?;
    if *tower.stages[0] != *p.stage_zero {
        return Err(Error::Internal("tower stage 0 differs from H₀".into()));
    }
    let mut f_cur = functor_from_gen_values(
        &p.semifree,
        &tower.stages[0],
        &p.object_map,
        &stage_zero_values(p)?,
    )?;
    let mut log = Vec::new();
    for n in 0..cap {
        match stage_lift(p, &tower, n, &f_cur, seed)? {
            StageOutcome::Lifted {
                functor,
                obstruction,
            } => {
                log.push(StageLog {
                    stage: n,
                    verdict: obstruction.verdict,
                });
                f_cur = functor;
            }
            StageOutcome::NoLift(obstruction) => {
                log.push(StageLog {
                    stage: n,
                    verdict: obstruction.verdict.clone(),
                });
                return Ok(RigidifyOutcome {
                    lift: None,
                    failed: Some(obstruction),
                    undecided: None,
                    log,
                    triangle_ok: false,
                });
            }
            StageOutcome::Undecided { obstruction, why } => {
                log.push(StageLog {
                    stage: n,
                    verdict: obstruction.verdict,
                });
                return Ok(RigidifyOutcome {
                    lift: None,
                    failed: None,
                    undecided: Some((n, why)),
                    log,
                    triangle_ok: false,
                });
            }
        }
    }
    // the top stage is the target itself: read the limit off degreewise
    let top = &tower.stages[cap as usize];
    if **top != **a {
        return Err(Error::Internal("top stage differs from the target".into()));
    }
    let b = &p.semifree;
    let mut values = BTreeMap::new();
    for (j, g) in b.gens.iter().enumerate() {
        values.insert(
            j,
            Elt {
                degree: g.degree,
                coords: f_cur
                    .map(g.source, g.target)
                    .f(g.degree)
                    .mul_vec(&b.gen_elements[j].1),
            },
        );
    }
    let lift = functor_from_gen_values(b, a, &p.object_map, &values)?;
    let down = tower.sections[0].compose(&lift)?;
    let triangle_ok = functors_equal(&down, &p.f0_functor);
    if !triangle_ok {
        return Err(Error::Internal("assembled lift breaks the defining triangle".into()));
    }
    Ok(RigidifyOutcome {
        lift: Some(lift),
        failed: None,
        undecided: None,
        log,
        triangle_ok,
    })
}

fn stage_zero_values(p: &LiftingProblem) -> Result<BTreeMap<usize, Elt>> {
    let field = p.target.field;
    let mut values = BTreeMap::new();
    for (j, g) in p.semifree.gens.iter().enumerate() {
        let (fx, fy) = (p.object_map[g.source], p.object_map[g.target]);
        let v = if g.degree == 0 {
            Elt {
                degree: 0,
                coords: p.f0[&j].clone(),
            }
        } else {
            Elt::zero(field, g.degree, p.stage_zero.hom(fx, fy).dim(g.degree))
        };
        values.insert(j, v);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Rationals
    }

    fn f2() -> Field {
        Field::Prime(2)
    }

    fn point(field: Field) -> Arc<DgCategory> {
        let hom = Complex::line(field, 0, "id");
        let mut t: CompTable = BTreeMap::new();
        t.insert(((0, 0), (0, 0)), vec![(0, field.one())]);
        let mut comp = BTreeMap::new();
        comp.insert((0, 0, 0), t);
        Arc::new(
            DgCategory::new(field, vec!["x".into()], vec![hom], comp, vec![vec![field.one()]])
                .unwrap(),
        )
    }

    fn free_arrow(_field: Field) -> (Vec<String>, Vec<GenSpec>) {
        (
            vec!["a".into(), "b".into()],
            vec![GenSpec {
                source: 0,
                target: 1,
                degree: 0,
                label: "f".into(),
                diff: vec![],
            }],
        )
    }

    /// Four objects in a chain with the two adjacent products killed by
    /// null-homotopies, so that the triple product carries a nontrivial
    /// degree-1 class.
    fn massey_target(field: Field) -> Arc<DgCategory> {
        let one = field.one();
        let line = |l: &str| Complex::line(field, 0, l);
        let two = |l0: &str, l1: &str| {
            Complex::new(
                field,
                0,
                vec![1, 1],
                vec![vec![l0.into()], vec![l1.into()]],
                vec![
                    Matrix::zero(field, 0, 1),
                    Matrix::from_ints(field, &[&[1]]),
                ],
            )
            .unwrap()
        };
        let h14 = Complex::new(
            field,
            0,
            vec![1, 2],
            vec![vec!["w".into()], vec!["cs".into(), "ta".into()]],
            vec![
                Matrix::zero(field, 0, 1),
                Matrix::from_ints(field, &[&[1, 1]]),
            ],
        )
        .unwrap();
        let objects: Vec<String> = (1..=4).map(|i| format!("x{i}")).collect();
        let mut homs = Vec::new();
        for x in 0..4usize {
            for y in 0..4usize {
                homs.push(match (x, y) {
                    _ if x == y => line("id"),
                    (0, 1) => line("a"),
                    (1, 2) => line("b"),
                    (2, 3) => line("c"),
                    (0, 2) => two("ba", "s"),
                    (1, 3) => two("cb", "t"),
                    (0, 3) => h14.clone(),
                    _ => Complex::zero(field),
                });
            }
        }
        let mut comp: BTreeMap<(usize, usize, usize), CompTable> = BTreeMap::new();
        let mut ins = |key: (usize, usize, usize), gk: (i64, usize), fk: (i64, usize), out: usize| {
            comp.entry(key)
                .or_default()
                .insert((gk, fk), vec![(out, one.clone())]);
        };
        // identities
        for x in 0..4usize {
            for y in 0..4usize {
                let h = &homs[x * 4 + y];
                for deg in h.support() {
                    for i in 0..h.dim(deg) {
                        ins((x, y, y), (0, 0), (deg, i), i);
                        ins((x, x, y), (deg, i), (0, 0), i);
                    }
                }
            }
        }
        ins((0, 1, 2), (0, 0), (0, 0), 0); // b∘a = ba
        ins((1, 2, 3), (0, 0), (0, 0), 0); // c∘b = cb
        ins((0, 2, 3), (0, 0), (0, 0), 0); // c∘ba = w
        ins((0, 2, 3), (0, 0), (1, 0), 0); // c∘s = cs
        ins((0, 1, 3), (0, 0), (0, 0), 0); // cb∘a = w
        ins((0, 1, 3), (1, 0), (0, 0), 1); // t∘a = ta
        let ids = vec![vec![one.clone()]; 4];
        let cat = DgCategory::new(field, objects, homs, comp, ids).unwrap();
        let report = cat.validate();
        assert!(report.is_valid(), "{:?}", report);
        Arc::new(cat)
    }

    /// The matching semi-free source: strictified relations plus (when
    /// `with_q`) a degree-2 generator demanding the triple product vanish.
    fn massey_source(field: Field, with_q: bool) -> (Vec<String>, Vec<GenSpec>) {
        let one = field.one();
        let mut gens = vec![
            GenSpec {
                source: 0,
                target: 1,
                degree: 0,
                label: "a".into(),
                diff: vec![],
            },
            GenSpec {
                source: 1,
                target: 2,
                degree: 0,
                label: "b".into(),
                diff: vec![],
            },
            GenSpec {
                source: 2,
                target: 3,
                degree: 0,
                label: "c".into(),
                diff: vec![],
            },
            GenSpec {
                source: 0,
                target: 2,
                degree: 1,
                label: "s".into(),
                diff: vec![(one.clone(), vec![0, 1])],
            },
            GenSpec {
                source: 1,
                target: 3,
                degree: 1,
                label: "t".into(),
                diff: vec![(one.clone(), vec![1, 2])],
            },
        ];
        if with_q {
            gens.push(GenSpec {
                source: 0,
                target: 3,
                degree: 2,
                label: "q".into(),
                diff: vec![
                    (one.clone(), vec![3, 2]),
                    (field.neg(&one), vec![0, 4]),
                ],
            });
        }
        let objects = (1..=4).map(|i| format!("o{i}")).collect();
        (objects, gens)
    }

    fn massey_problem(field: Field, with_q: bool) -> LiftingProblem {
        let a = massey_target(field);
        let (objects, gens) = massey_source(field, with_q);
        let mut f0 = BTreeMap::new();
        // a, b, c map to the corresponding H₀ classes (each hom has H₀ = k)
        for j in 0..3usize {
            f0.insert(j, vec![field.one()]);
        }
        LiftingProblem::new(a, objects, gens, vec![0, 1, 2, 3], f0).unwrap()
    }

    #[test]
    fn semi_free_materializes() {
        let field = q();
        let (objects, gens) = massey_source(field, true);
        let b = semi_free(field, objects, gens, 3).unwrap();
        assert!(b.cat.validate().is_valid());
        // hom(o1,o4) in degree 1 contains c∘s-shaped and t∘a-shaped words
        assert_eq!(b.cat.hom(0, 3).dim(1), 2);
        // degree 2 holds only q itself: s and t are not composable
        assert_eq!(b.cat.hom(0, 3).dim(2), 1);
        // degree-0 generator on a loop is rejected
        let bad = semi_free(
            field,
            vec!["a".into()],
            vec![GenSpec {
                source: 0,
                target: 0,
                degree: 0,
                label: "e".into(),
                diff: vec![],
            }],
            2,
        );
        assert!(matches!(bad, Err(Error::NotFinite(_))));
    }

    #[test]
    fn rigidify_degree_zero_target() {
        let field = q();
        let a = point(field);
        let (objects, gens) = free_arrow(field);
        let mut f0 = BTreeMap::new();
        f0.insert(0usize, vec![field.one()]);
        let p = LiftingProblem::new(a, objects, gens, vec![0, 0], f0).unwrap();
        let out = rigidify(&p, 0).unwrap();
        assert!(out.lift.is_some());
        assert!(out.triangle_ok);
    }

    #[test]
    fn massey_class_obstructs() {
        for field in [f2(), q()] {
            let p = massey_problem(field, true);
            let oc = obstruction_class(&p, 0, &p.f0_functor, 0).unwrap();
            assert_eq!(oc.verdict, VanishingVerdict::DoesNotVanish, "{field:?}");
            assert!(!oc.derivation.is_zero);
            let out = rigidify(&p, 0).unwrap();
            assert!(out.lift.is_none());
            assert_eq!(out.failed.as_ref().map(|o| o.stage), Some(0));
        }
    }

    #[test]
    fn massey_without_relation_lifts() {
        for field in [f2(), q()] {
            let p = massey_problem(field, false);
            let out = rigidify(&p, 0).unwrap();
            assert!(out.lift.is_some(), "{field:?}");
            assert!(out.triangle_ok);
        }
    }

    #[test]
    fn oracle_agrees_on_massey() {
        let p = massey_problem(f2(), true);
        let tower = small_tower(&p.target, p.cap).unwrap();
        let found = brute_force_lift_oracle(&p, &tower, 0, &p.f0_functor).unwrap();
        assert!(found.is_none());
        let p2 = massey_problem(f2(), false);
        let tower2 = small_tower(&p2.target, p2.cap).unwrap();
        let found2 = brute_force_lift_oracle(&p2, &tower2, 0, &p2.f0_functor).unwrap();
        assert!(found2.is_some());
    }

    #[test]
    fn forced_inconsistency_does_not_vanish() {
        // a degree-2 generator with zero differential and a nonzero
        // derivation value can never be a coboundary
        let field = q();
        let a = crate::cells::cell_category(field, crate::cells::CellKind::Sphere, 1).unwrap();
        let gens = vec![
            GenSpec {
                source: 0,
                target: 1,
                degree: 2,
                label: "g".into(),
                diff: vec![],
            },
        ];
        let p = LiftingProblem::new(
            a.clone(),
            vec!["u".into(), "v".into()],
            gens,
            vec![0, 1],
            BTreeMap::new(),
        )
        .unwrap();
        let mdl = crate::cells::bounded_big_model(&a, 0, 2).unwrap();
        let k = gamma(&mdl).unwrap();
        let mut d = BTreeMap::new();
        d.insert(
            0usize,
            Elt {
                degree: 2,
                coords: vec![field.one()],
            },
        );
        let (verdict, _, cert) = vanishing_test(&p, 0, &k.bimodule, &p.f0_functor, &d).unwrap();
        assert_eq!(verdict, VanishingVerdict::DoesNotVanish);
        assert!(cert.is_some());
        // and the zero derivation vanishes with the zero witness
        let (verdict, witness, _) =
            vanishing_test(&p, 0, &k.bimodule, &p.f0_functor, &BTreeMap::new()).unwrap();
        assert_eq!(verdict, VanishingVerdict::Vanishes);
        assert!(witness.is_some());
    }

    #[test]
    fn vanishing_round_trip() {
        // d(q) = h with h of degree n+1: any prescribed value on q is the
        // coboundary of H with H(h) that value
        let field = q();
        let a = crate::cells::cell_category(field, crate::cells::CellKind::Sphere, 1).unwrap();
        let one = field.one();
        let gens = vec![
            GenSpec {
                source: 0,
                target: 1,
                degree: 1,
                label: "h".into(),
                diff: vec![],
            },
            GenSpec {
                source: 0,
                target: 1,
                degree: 2,
                label: "q".into(),
                diff: vec![(one.clone(), vec![0])],
            },
        ];
        let p = LiftingProblem::new(
            a.clone(),
            vec!["u".into(), "v".into()],
            gens,
            vec![0, 1],
            BTreeMap::new(),
        )
        .unwrap();
        let mdl = crate::cells::bounded_big_model(&a, 0, 2).unwrap();
        let k = gamma(&mdl).unwrap();
        let mut d = BTreeMap::new();
        d.insert(
            1usize,
            Elt {
                degree: 2,
                coords: vec![field.from_integer(3)],
            },
        );
        let (verdict, witness, _) = vanishing_test(&p, 0, &k.bimodule, &p.f0_functor, &d).unwrap();
        assert_eq!(verdict, VanishingVerdict::Vanishes);
        let w = witness.unwrap();
        assert_eq!(w[&0].coords, vec![field.from_integer(3)]);
    }

    #[test]
    fn lift_projects_back_and_seeds_agree_on_verdict() {
        let p = massey_problem(q(), true);
        let mdl = crate::cells::bounded_big_model(&p.target, 0, p.cap.max(2)).unwrap();
        for seed in [0u64, 1, 7] {
            let f_tilde =
                lift_over_trivial_fibration(&p.semifree, &mdl, &p.f0_functor, &p.object_map, seed)
                    .unwrap();
            assert!(f_tilde.validate().is_valid());
            let oc = obstruction_class(&p, 0, &p.f0_functor, seed).unwrap();
            assert_eq!(oc.verdict, VanishingVerdict::DoesNotVanish);
        }
    }
}
