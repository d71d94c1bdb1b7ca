//! Bimodules, square-zero extensions, the homology bimodule placed in
//! degree n+2, the k-invariant functor out of the bounded model, and the
//! fiber-sequence verification.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cells::{bounded_big_model, BoundedBigModel, Factor};
use crate::complexes::{homology, Complex};
use crate::dgcat::{BasisRef, CompTable, DgCategory, DgFunctor, Elt};
use crate::error::{Error, Result};
use crate::exactlin::{Field, Matrix, Scalar};

pub type ActTable = BTreeMap<(BasisRef, BasisRef), Vec<(usize, Scalar)>>;

/// A bimodule over a dg category: a complex per hom pair with left and
/// right actions given by structure constants.
#[derive(Clone, Debug)]
pub struct Bimodule {
    pub over: Arc<DgCategory>,
    pub homs: Vec<Complex>,
    /// (x,y,z): keys (g in over(y,z), m in M(x,y)), values in M(x,z)
    pub left: BTreeMap<(usize, usize, usize), ActTable>,
    /// (x,y,z): keys (m in M(y,z), f in over(x,y)), values in M(x,z)
    pub right: BTreeMap<(usize, usize, usize), ActTable>,
}

impl Bimodule {
    pub fn zero(over: Arc<DgCategory>) -> Bimodule {
        let n = over.nobj();
        let homs = (0..n * n).map(|_| Complex::zero(over.field)).collect();
        Bimodule {
            over,
            homs,
            left: BTreeMap::new(),
            right: BTreeMap::new(),
        }
    }

    pub fn hom(&self, x: usize, y: usize) -> &Complex {
        &self.homs[x * self.over.nobj() + y]
    }

    pub fn is_zero(&self) -> bool {
        self.homs.iter().all(|c| c.is_zero_complex())
    }

    pub fn act_left(&self, x: usize, y: usize, z: usize, g: &Elt, m: &Elt) -> Elt {
        let field = self.over.field;
        let deg = g.degree + m.degree;
        let mut out = Elt::zero(field, deg, self.hom(x, z).dim(deg));
        let Some(table) = self.left.get(&(x, y, z)) else {
            return out;
        };
        for (gi, gc) in g.coords.iter().enumerate() {
            if gc.is_zero() {
                continue;
            }
            for (mi, mc) in m.coords.iter().enumerate() {
                if mc.is_zero() {
                    continue;
                }
                if let Some(val) = table.get(&((g.degree, gi), (m.degree, mi))) {
                    let s = field.mul(gc, mc);
                    for (ri, rc) in val {
                        out.coords[*ri] = field.add(&out.coords[*ri], &field.mul(&s, rc));
                    }
                }
            }
        }
        out
    }

    pub fn act_right(&self, x: usize, y: usize, z: usize, m: &Elt, f: &Elt) -> Elt {
        let field = self.over.field;
        let deg = m.degree + f.degree;
        let mut out = Elt::zero(field, deg, self.hom(x, z).dim(deg));
        let Some(table) = self.right.get(&(x, y, z)) else {
            return out;
        };
        for (mi, mc) in m.coords.iter().enumerate() {
            if mc.is_zero() {
                continue;
            }
            for (fi, fc) in f.coords.iter().enumerate() {
                if fc.is_zero() {
                    continue;
                }
                if let Some(val) = table.get(&((m.degree, mi), (f.degree, fi))) {
                    let s = field.mul(mc, fc);
                    for (ri, rc) in val {
                        out.coords[*ri] = field.add(&out.coords[*ri], &field.mul(&s, rc));
                    }
                }
            }
        }
        out
    }

    fn diff(&self, x: usize, y: usize, e: &Elt) -> Elt {
        Elt {
            degree: e.degree - 1,
            coords: self.hom(x, y).d(e.degree).mul_vec(&e.coords),
        }
    }

    /// Actions are chain maps, associative in all mixed triples, and the
    /// identity acts as the identity.
    pub fn validate(&self) -> Vec<String> {
        let a = &self.over;
        let field = a.field;
        let n = a.nobj();
        let mut bad = Vec::new();
        let sign = |d: i64| field.from_integer(if d.rem_euclid(2) == 0 { 1 } else { -1 });
        for x in 0..n {
            for y in 0..n {
                let mh = self.hom(x, y);
                // unit actions
                for deg in mh.support() {
                    for mi in 0..mh.dim(deg) {
                        let m = basis(field, deg, mh.dim(deg), mi);
                        if self.act_left(x, y, y, &a.id(y), &m) != m {
                            bad.push(format!("id·m ≠ m at ({x},{y}) degree {deg}"));
                        }
                        if self.act_right(x, x, y, &m, &a.id(x)) != m {
                            bad.push(format!("m·id ≠ m at ({x},{y}) degree {deg}"));
                        }
                    }
                }
                for z in 0..n {
                    let gh = a.hom(y, z);
                    // left action: chain map and associativity
                    for gd in gh.support() {
                        for gi in 0..gh.dim(gd) {
                            let g = a.basis_elt(y, z, (gd, gi));
                            for md in mh.support() {
                                for mi in 0..mh.dim(md) {
                                    let m = basis(field, md, mh.dim(md), mi);
                                    let gm = self.act_left(x, y, z, &g, &m);
                                    let lhs = self.diff(x, z, &gm);
                                    let t1 =
                                        self.act_left(x, y, z, &a.diff(y, z, &g), &m);
                                    let t2 = self.act_left(x, y, z, &g, &self.diff(x, y, &m));
                                    let rhs = add(field, &t1, &scale(field, &sign(gd), &t2));
                                    if lhs != rhs {
                                        bad.push(format!(
                                            "left action not a chain map at ({x},{y},{z})"
                                        ));
                                    }
                                }
                            }
                        }
                    }
                    // right action: chain map
                    let mh2 = self.hom(y, z);
                    let fh = a.hom(x, y);
                    for md in mh2.support() {
                        for mi in 0..mh2.dim(md) {
                            let m = basis(field, md, mh2.dim(md), mi);
                            for fd in fh.support() {
                                for fi in 0..fh.dim(fd) {
                                    let f = a.basis_elt(x, y, (fd, fi));
                                    let mf = self.act_right(x, y, z, &m, &f);
                                    let lhs = self.diff(x, z, &mf);
                                    let t1 =
                                        self.act_right(x, y, z, &self.diff(y, z, &m), &f);
                                    let t2 = self.act_right(x, y, z, &m, &a.diff(x, y, &f));
                                    let rhs = add(field, &t1, &scale(field, &sign(md), &t2));
                                    if lhs != rhs {
                                        bad.push(format!(
                                            "right action not a chain map at ({x},{y},{z})"
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        // associativity of mixed triples
        for w in 0..n {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        let g2h = a.hom(y, z);
                        let g1h = a.hom(x, y);
                        let mh = self.hom(w, x);
                        for d2 in g2h.support() {
                            for i2 in 0..g2h.dim(d2) {
                                let g2 = a.basis_elt(y, z, (d2, i2));
                                for d1 in g1h.support() {
                                    for i1 in 0..g1h.dim(d1) {
                                        let g1 = a.basis_elt(x, y, (d1, i1));
                                        for md in mh.support() {
                                            for mi in 0..mh.dim(md) {
                                                let m =
                                                    basis(a.field, md, mh.dim(md), mi);
                                                let l1 = self.act_left(
                                                    w,
                                                    y,
                                                    z,
                                                    &g2,
                                                    &self.act_left(w, x, y, &g1, &m),
                                                );
                                                let l2 = self.act_left(
                                                    w,
                                                    x,
                                                    z,
                                                    &a.compose(x, y, z, &g2, &g1),
                                                    &m,
                                                );
                                                if l1 != l2 {
                                                    bad.push(format!(
                                                        "left action not associative at ({w},{x},{y},{z})"
                                                    ));
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                        // (g·m)·f = g·(m·f)
                        let gh = a.hom(y, z);
                        let mh2 = self.hom(x, y);
                        let fh = a.hom(w, x);
                        for gd in gh.support() {
                            for gi in 0..gh.dim(gd) {
                                let g = a.basis_elt(y, z, (gd, gi));
                                for md in mh2.support() {
                                    for mi in 0..mh2.dim(md) {
                                        let m = basis(a.field, md, mh2.dim(md), mi);
                                        for fd in fh.support() {
                                            for fi in 0..fh.dim(fd) {
                                                let f = a.basis_elt(w, x, (fd, fi));
                                                let l = self.act_right(
                                                    w,
                                                    x,
                                                    z,
                                                    &self.act_left(x, y, z, &g, &m),
                                                    &f,
                                                );
                                                let r = self.act_left(
                                                    w,
                                                    y,
                                                    z,
                                                    &g,
                                                    &self.act_right(w, x, y, &m, &f),
                                                );
                                                if l != r {
                                                    bad.push(format!(
                                                        "mixed associativity fails at ({w},{x},{y},{z})"
                                                    ));
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                        // right-right associativity
                        let mh3 = self.hom(y, z);
                        let f2h = a.hom(x, y);
                        let f1h = a.hom(w, x);
                        for md in mh3.support() {
                            for mi in 0..mh3.dim(md) {
                                let m = basis(a.field, md, mh3.dim(md), mi);
                                for d2 in f2h.support() {
                                    for i2 in 0..f2h.dim(d2) {
                                        let f2 = a.basis_elt(x, y, (d2, i2));
                                        for d1 in f1h.support() {
                                            for i1 in 0..f1h.dim(d1) {
                                                let f1 = a.basis_elt(w, x, (d1, i1));
                                                let lhs = self.act_right(
                                                    w,
                                                    x,
                                                    z,
                                                    &self.act_right(x, y, z, &m, &f2),
                                                    &f1,
                                                );
                                                let rhs = self.act_right(
                                                    w,
                                                    y,
                                                    z,
                                                    &m,
                                                    &a.compose(w, x, y, &f2, &f1),
                                                );
                                                if lhs != rhs {
                                                    bad.push(format!(
                                                        "right action not associative at ({w},{x},{y},{z})"
                                                    ));
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        bad.sort();
        bad.dedup();
        bad
    }
}

fn basis(field: Field, degree: i64, dim: usize, i: usize) -> Elt {
    let mut e = Elt::zero(field, degree, dim);
    e.coords[i] = field.one();
    e
}

fn add(field: Field, a: &Elt, b: &Elt) -> Elt {
    Elt {
        degree: a.degree,
        coords: crate::exactlin::vec_add(field, &a.coords, &b.coords),
    }
}

fn scale(field: Field, c: &Scalar, a: &Elt) -> Elt {
    Elt {
        degree: a.degree,
        coords: crate::exactlin::vec_scale(field, c, &a.coords),
    }
}

/// The square-zero extension: hom(x,y) = over(x,y) ⊕ M(x,y), products of
/// two M-components vanish.
pub struct SquareZeroExtension {
    pub base: Arc<DgCategory>,
    pub bimodule: Bimodule,
    pub total: Arc<DgCategory>,
    pub inclusion: DgFunctor,
    pub projection: DgFunctor,
}

impl SquareZeroExtension {
    pub fn a_dim(&self, x: usize, y: usize, deg: i64) -> usize {
        self.base.hom(x, y).dim(deg)
    }

    /// Embed a bimodule element into the total hom.
    pub fn embed_m(&self, x: usize, y: usize, m: &Elt) -> Elt {
        let field = self.base.field;
        let ad = self.a_dim(x, y, m.degree);
        let mut coords = vec![field.zero(); self.total.hom(x, y).dim(m.degree)];
        for (i, c) in m.coords.iter().enumerate() {
            coords[ad + i] = c.clone();
        }
        Elt {
            degree: m.degree,
            coords,
        }
    }

    pub fn m_component(&self, x: usize, y: usize, e: &Elt) -> Elt {
        let ad = self.a_dim(x, y, e.degree);
        Elt {
            degree: e.degree,
            coords: e.coords[ad..].to_vec(),
        }
    }
}

pub fn square_zero(a: &Arc<DgCategory>, m: Bimodule) -> Result<SquareZeroExtension> {
    if *m.over != **a {
        return Err(Error::InvalidBimodule("bimodule is over a different category".into()));
    }
    let field = a.field;
    let nobj = a.nobj();
    let mut homs = Vec::new();
    for (x, y) in a.pairs() {
        let ah = a.hom(x, y);
        let mh = m.hom(x, y);
        if mh.is_zero_complex() {
            homs.push(ah.clone());
            continue;
        }
        let lo = (*ah.support().start()).min(*mh.support().start());
        let hi = (*ah.support().end()).max(*mh.support().end());
        let mut dims = Vec::new();
        let mut labels = Vec::new();
        let mut diffs = Vec::new();
        for deg in lo..=hi {
            dims.push(ah.dim(deg) + mh.dim(deg));
            let mut seen: BTreeMap<String, usize> = BTreeMap::new();
            let mut ls = Vec::new();
            for l in ah.labels(deg).iter().chain(mh.labels(deg)) {
                let mut l = l.clone();
                let count = seen.entry(l.clone()).or_insert(0);
                if *count > 0 {
                    l = format!("{l}#{count}");
                }
                *count += 1;
                ls.push(l);
            }
            labels.push(ls);
            let (ra, rm) = (ah.dim(deg - 1), mh.dim(deg - 1));
            let (ca, cm) = (ah.dim(deg), mh.dim(deg));
            let mut d = Matrix::zero(field, ra + rm, ca + cm);
            let da = ah.d(deg);
            for i in 0..ra {
                for j in 0..ca {
                    d.set(i, j, da.get(i, j).clone());
                }
            }
            let dm = mh.d(deg);
            for i in 0..rm {
                for j in 0..cm {
                    d.set(ra + i, ca + j, dm.get(i, j).clone());
                }
            }
            diffs.push(d);
        }
        homs.push(Complex::new(field, lo, dims, labels, diffs)?);
    }
    let mut comp = BTreeMap::new();
    for x in 0..nobj {
        for y in 0..nobj {
            for z in 0..nobj {
                let mut table: CompTable = BTreeMap::new();
                let off = |p: usize, q: usize, deg: i64| a.hom(p, q).dim(deg);
                if let Some(t) = a.comp_tables().get(&(x, y, z)) {
                    for ((g, f), val) in t {
                        table.insert((*g, *f), val.clone());
                    }
                }
                if let Some(t) = m.left.get(&(x, y, z)) {
                    for (((gd, gi), (md, mi)), val) in t {
                        let key = ((*gd, *gi), (*md, mi + off(x, y, *md)));
                        let shifted: Vec<(usize, Scalar)> = val
                            .iter()
                            .map(|(i, c)| (i + off(x, z, gd + md), c.clone()))
                            .collect();
                        table.insert(key, shifted);
                    }
                }
                if let Some(t) = m.right.get(&(x, y, z)) {
                    for (((md, mi), (fd, fi)), val) in t {
                        let key = ((*md, mi + off(y, z, *md)), (*fd, *fi));
                        let shifted: Vec<(usize, Scalar)> = val
                            .iter()
                            .map(|(i, c)| (i + off(x, z, md + fd), c.clone()))
                            .collect();
                        table.insert(key, shifted);
                    }
                }
                if !table.is_empty() {
                    comp.insert((x, y, z), table);
                }
            }
        }
    }
    let ids = (0..nobj)
        .map(|x| {
            let mut coords = a.id(x).coords.clone();
            coords.extend(vec![field.zero(); m.hom(x, x).dim(0)]);
            coords
        })
        .collect();
    let total = Arc::new(DgCategory::new(
        field,
        a.objects.clone(),
        homs,
        comp,
        ids,
    )?);
    let incl_maps = a
        .pairs()
        .map(|(x, y)| {
            let ah = a.hom(x, y);
            let th = total.hom(x, y);
            let mut maps = Vec::new();
            for deg in ah.support() {
                let mut mx = Matrix::zero(field, th.dim(deg), ah.dim(deg));
                for i in 0..ah.dim(deg) {
                    mx.set(i, i, field.one());
                }
                maps.push((deg, mx));
            }
            crate::complexes::ChainMap::new(ah.clone(), th.clone(), maps)
        })
        .collect::<Result<Vec<_>>>()?;
    let proj_maps = a
        .pairs()
        .map(|(x, y)| {
            let ah = a.hom(x, y);
            let th = total.hom(x, y);
            let mut maps = Vec::new();
            for deg in th.support() {
                let mut mx = Matrix::zero(field, ah.dim(deg), th.dim(deg));
                for i in 0..ah.dim(deg) {
                    mx.set(i, i, field.one());
                }
                maps.push((deg, mx));
            }
            crate::complexes::ChainMap::new(th.clone(), ah.clone(), maps)
        })
        .collect::<Result<Vec<_>>>()?;
    let inclusion = DgFunctor::new(a.clone(), total.clone(), (0..nobj).collect(), incl_maps)?;
    let projection = DgFunctor::new(total.clone(), a.clone(), (0..nobj).collect(), proj_maps)?;
    Ok(SquareZeroExtension {
        base: a.clone(),
        bimodule: m,
        total,
        inclusion,
        projection,
    })
}

/// The bimodule H_{n+1}(A) placed in degree n+2 over the truncated stage,
/// acting through H₀ classes.
pub fn hn_bimodule(
    a: &Arc<DgCategory>,
    small: &Arc<DgCategory>,
    small_section: &DgFunctor,
    n: i64,
) -> Result<Bimodule> {
    let field = a.field;
    let nobj = a.nobj();
    let hs: Vec<_> = a.pairs().map(|(x, y)| homology(a.hom(x, y))).collect();
    let mut homs = Vec::new();
    for (x, y) in a.pairs() {
        let h = &hs[x * nobj + y];
        let dim = h.h_dim(n + 1);
        if dim == 0 {
            homs.push(Complex::zero(field));
        } else {
            let labels = h
                .degree(n + 1)
                .map(|d| d.class_labels.clone())
                .unwrap_or_default();
            homs.push(Complex::new(
                field,
                n + 2,
                vec![dim],
                vec![labels],
                vec![Matrix::zero(field, 0, dim)],
            )?);
        }
    }
    // degree-0 representatives in A of the stage's degree-0 basis
    let mut reps = Vec::new();
    for (x, y) in a.pairs() {
        let q = small.hom(x, y).dim(0);
        let r = small_section
            .map(x, y)
            .f(0)
            .solve_matrix(&Matrix::identity(field, q))?
            .ok_or_else(|| Error::Internal("stage projection not surjective".into()))?;
        reps.push(r);
    }
    let mut left = BTreeMap::new();
    let mut right = BTreeMap::new();
    for x in 0..nobj {
        for y in 0..nobj {
            for z in 0..nobj {
                // left: over(y,z)_0 acting on M(x,y)
                let gq = small.hom(y, z).dim(0);
                let mdim = homs[x * nobj + y].dim(n + 2);
                let out = &hs[x * nobj + z];
                let mut lt: ActTable = BTreeMap::new();
                for gi in 0..gq {
                    let grep = Elt {
                        degree: 0,
                        coords: reps[y * nobj + z].column(gi),
                    };
                    for mi in 0..mdim {
                        let mrep = Elt {
                            degree: n + 1,
                            coords: hs[x * nobj + y]
                                .section(n + 1, a.hom(x, y).dim(n + 1), field)
                                .column(mi),
                        };
                        let prod = a.compose(x, y, z, &grep, &mrep);
                        let cls = out
                            .class_of(n + 1, a.hom(x, z).dim(n + 1), field)
                            .mul_vec(&prod.coords);
                        let val: Vec<(usize, Scalar)> = cls
                            .into_iter()
                            .enumerate()
                            .filter(|(_, c)| !c.is_zero())
                            .collect();
                        if !val.is_empty() {
                            lt.insert(((0, gi), (n + 2, mi)), val);
                        }
                    }
                }
                if !lt.is_empty() {
                    left.insert((x, y, z), lt);
                }
                // right: M(y,z) acted on by over(x,y)_0
                let fq = small.hom(x, y).dim(0);
                let mdim = homs[y * nobj + z].dim(n + 2);
                let out = &hs[x * nobj + z];
                let mut rt: ActTable = BTreeMap::new();
                for mi in 0..mdim {
                    let mrep = Elt {
                        degree: n + 1,
                        coords: hs[y * nobj + z]
                            .section(n + 1, a.hom(y, z).dim(n + 1), field)
                            .column(mi),
                    };
                    for fi in 0..fq {
                        let frep = Elt {
                            degree: 0,
                            coords: reps[x * nobj + y].column(fi),
                        };
                        let prod = a.compose(x, y, z, &mrep, &frep);
                        let cls = out
                            .class_of(n + 1, a.hom(x, z).dim(n + 1), field)
                            .mul_vec(&prod.coords);
                        let val: Vec<(usize, Scalar)> = cls
                            .into_iter()
                            .enumerate()
                            .filter(|(_, c)| !c.is_zero())
                            .collect();
                        if !val.is_empty() {
                            rt.insert(((n + 2, mi), (0, fi)), val);
                        }
                    }
                }
                if !rt.is_empty() {
                    right.insert((x, y, z), rt);
                }
            }
        }
    }
    Ok(Bimodule {
        over: small.clone(),
        homs,
        left,
        right,
    })
}

/// The k-invariant: the functor from the bounded model into the square-zero
/// extension, sending first-sweep generators to the classes of their
/// attaching cycles and everything deeper to zero.
pub struct KInvariantData {
    pub stage: i64,
    pub bimodule: Bimodule,
    pub extension: SquareZeroExtension,
    pub functor: DgFunctor,
    /// per pair: M(x,y)-dim × model-dim matrix at degree n+2
    pub m_component: Vec<Matrix>,
}

pub fn gamma(mdl: &BoundedBigModel) -> Result<KInvariantData> {
    let a = &mdl.base;
    let field = a.field;
    let nobj = a.nobj();
    let n = mdl.stage;
    if mdl.cap < n + 2 {
        return Err(Error::CapTooSmall {
            cap: mdl.cap,
            why: format!("k-invariant at stage {n} needs cap ≥ {}", n + 2),
        });
    }
    let bimodule = hn_bimodule(a, &mdl.small, &mdl.small_section, n)?;
    let sz = square_zero(&mdl.small, bimodule.clone())?;
    let hs: Vec<_> = a.pairs().map(|(x, y)| homology(a.hom(x, y))).collect();
    let mut m_component = Vec::new();
    let mut maps = Vec::new();
    for (x, y) in mdl.model.pairs() {
        let pair = x * nobj + y;
        let mh = mdl.model.hom(x, y);
        let th = sz.total.hom(x, y);
        let mdim = bimodule.hom(x, y).dim(n + 2);
        let mut gm = Matrix::zero(field, mdim, mh.dim(n + 2));
        for idx in 0..mh.dim(n + 2) {
            let word = &mdl.provenance[pair][&(n + 2, idx)];
            let val = gamma_m_of_word(mdl, &bimodule, &hs, x, y, word, field);
            if let Some(v) = val {
                for (r, c) in v.coords.iter().enumerate() {
                    gm.set(r, idx, c.clone());
                }
            }
        }
        let mut cm = Vec::new();
        for deg in mh.support() {
            let m = if deg <= n {
                // embed the truncation into the A-part of the extension
                let base = mdl.small_section.map(x, y).f(deg);
                let mut mx = Matrix::zero(field, th.dim(deg), mh.dim(deg));
                for i in 0..base.rows {
                    for j in 0..base.cols {
                        mx.set(i, j, base.get(i, j).clone());
                    }
                }
                mx
            } else if deg == n + 2 {
                let ad = sz.a_dim(x, y, n + 2);
                let mut mx = Matrix::zero(field, th.dim(n + 2), mh.dim(n + 2));
                for i in 0..mdim {
                    for j in 0..mh.dim(n + 2) {
                        mx.set(ad + i, j, gm.get(i, j).clone());
                    }
                }
                mx
            } else {
                Matrix::zero(field, th.dim(deg), mh.dim(deg))
            };
            cm.push((deg, m));
        }
        maps.push(crate::complexes::ChainMap::new(mh.clone(), th.clone(), cm)?);
        m_component.push(gm);
    }
    let functor = DgFunctor::new(
        mdl.model.clone(),
        sz.total.clone(),
        (0..nobj).collect(),
        maps,
    )?;
    Ok(KInvariantData {
        stage: n,
        bimodule,
        extension: sz,
        functor,
        m_component,
    })
}

/// The M-part of the k-invariant on one degree-(n+2) basis word: nonzero
/// only for words of shape (degree-0 base) ∘ first-sweep-generator ∘
/// (degree-0 base), where it is the class of the attaching cycle acted on
/// by the H₀ classes of the outer factors.
fn gamma_m_of_word(
    mdl: &BoundedBigModel,
    bimodule: &Bimodule,
    hs: &[crate::complexes::HomologyData],
    x: usize,
    y: usize,
    word: &crate::cells::Word,
    field: Field,
) -> Option<Elt> {
    let nobj = mdl.base.nobj();
    if word.len() != 3 {
        return None;
    }
    let Factor::Base {
        degree: rd,
        index: ri,
        to: s,
        ..
    } = &word[0]
    else {
        return None;
    };
    let Factor::Gen(c) = &word[1] else { return None };
    let Factor::Base {
        degree: ld,
        index: li,
        from: t,
        ..
    } = &word[2]
    else {
        return None;
    };
    if *rd != 0 || *ld != 0 {
        return None;
    }
    let gen = &mdl.gens[*c];
    let z = gen.cycle_in_base.as_ref()?;
    let zdim = mdl.base.hom(*s, *t).dim(gen.m);
    let cls = hs[*s * nobj + *t]
        .class_of(gen.m, zdim, field)
        .mul_vec(z);
    let m0 = Elt {
        degree: gen.m + 1,
        coords: cls,
    };
    let e1 = Elt {
        degree: 0,
        coords: mdl.small_section.map(x, *s).f(0).column(*ri),
    };
    let m1 = bimodule.act_right(x, *s, *t, &m0, &e1);
    let e2 = Elt {
        degree: 0,
        coords: mdl.small_section.map(*t, y).f(0).column(*li),
    };
    Some(bimodule.act_left(x, *t, y, &e2, &m1))
}

/// A derivation representative: per hom pair of a source category, a linear
/// map from degree-(n+2) chains into the bimodule fiber. Everything in
/// other degrees is sent to zero.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub degree: i64,
    pub maps: Vec<Matrix>,
    pub is_zero: bool,
}

impl Derivation {
    pub fn new(degree: i64, maps: Vec<Matrix>) -> Derivation {
        let is_zero = maps.iter().all(|m| m.is_zero());
        Derivation {
            degree,
            maps,
            is_zero,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FiberSequenceReport {
    pub stage: i64,
    pub cap: i64,
    /// degree-(n+2) chain group of the fiber is the kernel of a surjection
    /// onto H_{n+1}
    pub kernel_identification: bool,
    /// H_j of the fiber vanishes for n+2 ≤ j ≤ cap−2
    pub w_vanishing: bool,
    pub theta_built: bool,
    /// the comparison maps commute with the differentials up to cap−1
    pub theta_chain: bool,
    /// the comparison induces homology isomorphisms in degrees ≤ cap−2
    pub theta_quasi_iso: bool,
    pub details: Vec<String>,
}

impl FiberSequenceReport {
    pub fn ok(&self) -> bool {
        self.kernel_identification
            && self.w_vanishing
            && self.theta_built
            && self.theta_chain
            && self.theta_quasi_iso
    }
}

/// Verify the fiber sequence at stage n: build the strict degreewise
/// pullback 𝒲 of the extension inclusion against the k-invariant (the
/// subspace of the stage-n model where the M-component vanishes), compare
/// the stage-(n+1) model against it by a recursively constructed chain map
/// θ, and re-check the intermediate homology claims.
pub fn verify_fiber_sequence(a: &Arc<DgCategory>, n: i64, cap: i64) -> Result<FiberSequenceReport> {
    let field = a.field;
    let nobj = a.nobj();
    if cap < n + 3 {
        return Err(Error::CapTooSmall {
            cap,
            why: format!("fiber sequence at stage {n} needs cap ≥ {}", n + 3),
        });
    }
    let mdl_n = bounded_big_model(a, n, cap)?;
    let k = gamma(&mdl_n)?;
    let mdl_n1 = bounded_big_model(a, n + 1, cap)?;
    let mut details = Vec::new();
    let mut kernel_identification = true;
    let mut w_vanishing = true;
    let mut theta_chain = true;
    let mut theta_quasi_iso = true;
    let mut theta_built = true;

    // the fiber complex per pair, with its inclusion into the stage-n model
    let mut w_complexes = Vec::new();
    let mut w_incl: Vec<BTreeMap<i64, Matrix>> = Vec::new();
    for (x, y) in a.pairs() {
        let pair = x * nobj + y;
        let mh = mdl_n.model.hom(x, y);
        let gm = &k.m_component[pair];
        let mdim = k.bimodule.hom(x, y).dim(n + 2);
        if mdim > 0 && gm.rank() != mdim {
            kernel_identification = false;
            details.push(format!(
                "M-component not surjective onto H_{} at ({x},{y})",
                n + 1
            ));
        }
        let mut incl = BTreeMap::new();
        let mut dims = Vec::new();
        let mut labels = Vec::new();
        let mut diffs = Vec::new();
        let hi = *mh.support().end();
        for deg in 0..=hi {
            let m = if deg == n + 2 {
                Matrix::from_columns(field, mh.dim(deg), &gm.kernel_basis())
            } else {
                Matrix::identity(field, mh.dim(deg))
            };
            dims.push(m.cols);
            labels.push(if deg == n + 2 {
                (0..m.cols).map(|i| format!("w{i}")).collect()
            } else {
                mh.labels(deg).to_vec()
            });
            incl.insert(deg, m);
        }
        for deg in 0..=hi {
            let di = mh.d(deg).mul(&incl[&deg]);
            let prev = incl
                .get(&(deg - 1))
                .cloned()
                .unwrap_or_else(|| Matrix::identity(field, mh.dim(deg - 1)));
            let dw = prev
                .solve_matrix(&di)?
                .ok_or_else(|| Error::Internal("fiber not closed under d".into()))?;
            diffs.push(dw);
        }
        w_complexes.push(Complex::new(field, 0, dims, labels, diffs)?);
        for deg in (hi + 1)..cap {
            incl.insert(deg, Matrix::identity(field, mh.dim(deg)));
        }
        w_incl.push(incl);
    }
    // intermediate homology claim
    for (x, y) in a.pairs() {
        let h = homology(&w_complexes[x * nobj + y]);
        for j in (n + 2)..=(cap - 2) {
            if h.h_dim(j) != 0 {
                w_vanishing = false;
                details.push(format!(
                    "H_{j} of the fiber at ({x},{y}) has dimension {}",
                    h.h_dim(j)
                ));
            }
        }
    }

    // θ: stage-(n+1) model → fiber, built degree by degree in model-n
    // coordinates; generator values solve d(c) = θ(d gen)
    let mut theta: Vec<BTreeMap<i64, Matrix>> = (0..nobj * nobj).map(|_| BTreeMap::new()).collect();
    let mut gen_values: BTreeMap<usize, Vec<Scalar>> = BTreeMap::new();
    'outer: for deg in 0..cap {
        // generator values at this degree first
        for (ci, gen) in mdl_n1.gens.iter().enumerate() {
            if gen.m + 1 != deg {
                continue;
            }
            let pair = gen.source * nobj + gen.target;
            let (gd, coords) = &gen.element;
            let dz = mdl_n1.model.hom(gen.source, gen.target).d(*gd).mul_vec(coords);
            let tz = theta[pair]
                .get(&(gd - 1))
                .ok_or_else(|| Error::Internal("theta built out of order".into()))?
                .mul_vec(&dz);
            // solve in the fiber: d_W(c) = θ(z), then re-embed
            let tz_w = match w_incl[pair][&(gd - 1)].solve(&tz)? {
                Some(v) => v,
                None => {
                    theta_built = false;
                    details.push(format!("θ(dz) escapes the fiber for generator {}", gen.label));
                    break 'outer;
                }
            };
            let dw = w_complexes[pair].d(*gd);
            match dw.solve(&tz_w)? {
                Some(c) => {
                    gen_values.insert(ci, w_incl[pair][gd].mul_vec(&c));
                }
                None => {
                    theta_built = false;
                    details.push(format!(
                        "no bounding chain in the fiber for generator {}",
                        gen.label
                    ));
                    break 'outer;
                }
            }
        }
        // θ matrix at this degree from word products
        for (x, y) in a.pairs() {
            let pair = x * nobj + y;
            let src_dim = mdl_n1.model.hom(x, y).dim(deg);
            let tgt_dim = mdl_n.model.hom(x, y).dim(deg);
            let mut m = Matrix::zero(field, tgt_dim, src_dim);
            for idx in 0..src_dim {
                let word = &mdl_n1.provenance[pair][&(deg, idx)];
                if let Some(v) = eval_word_in_model(&mdl_n, &mdl_n1, &gen_values, word, field) {
                    for (r, c) in v.coords.iter().enumerate() {
                        m.set(r, idx, c.clone());
                    }
                } else {
                    theta_built = false;
                    details.push(format!("θ undefined on a degree-{deg} word at ({x},{y})"));
                    break 'outer;
                }
            }
            theta[pair].insert(deg, m);
        }
    }

    if theta_built {
        // express θ in fiber coordinates and check the chain property
        let mut theta_w: Vec<BTreeMap<i64, Matrix>> =
            (0..nobj * nobj).map(|_| BTreeMap::new()).collect();
        for (x, y) in a.pairs() {
            let pair = x * nobj + y;
            for (deg, m) in &theta[pair] {
                match w_incl[pair][deg].solve_matrix(m)? {
                    Some(v) => {
                        theta_w[pair].insert(*deg, v);
                    }
                    None => {
                        theta_built = false;
                        details.push(format!("θ image escapes the fiber at ({x},{y}) degree {deg}"));
                    }
                }
            }
        }
        if theta_built {
            for (x, y) in a.pairs() {
                let pair = x * nobj + y;
                for j in 1..cap {
                    let lhs = theta_w[pair][&(j - 1)].mul(&mdl_n1.model.hom(x, y).d(j));
                    let rhs = w_complexes[pair].d(j).mul(&theta_w[pair][&j]);
                    if lhs != rhs {
                        theta_chain = false;
                        details.push(format!("θ chain condition fails at ({x},{y}) degree {j}"));
                    }
                }
            }
            for (x, y) in a.pairs() {
                let pair = x * nobj + y;
                let hsrc = homology(mdl_n1.model.hom(x, y));
                let hw = homology(&w_complexes[pair]);
                for j in 0..=(cap - 2) {
                    let cls = hw.class_of(j, w_complexes[pair].dim(j), field);
                    let sec = hsrc.section(j, mdl_n1.model.hom(x, y).dim(j), field);
                    let ind = cls.mul(&theta_w[pair][&j]).mul(&sec);
                    if hsrc.h_dim(j) != hw.h_dim(j) || ind.rank() != hsrc.h_dim(j) {
                        theta_quasi_iso = false;
                        details.push(format!(
                            "θ not a homology isomorphism at ({x},{y}) degree {j}"
                        ));
                    }
                }
            }
        }
    }
    if !theta_built {
        theta_chain = false;
        theta_quasi_iso = false;
    }
    Ok(FiberSequenceReport {
        stage: n,
        cap,
        kernel_identification,
        w_vanishing,
        theta_built,
        theta_chain,
        theta_quasi_iso,
        details,
    })
}

/// Evaluate a flat word of the stage-(n+1) model inside the stage-n model:
/// base factors through the stage-n section, generators through their
/// solved bounding chains.
fn eval_word_in_model(
    mdl_n: &BoundedBigModel,
    mdl_n1: &BoundedBigModel,
    gen_values: &BTreeMap<usize, Vec<Scalar>>,
    word: &crate::cells::Word,
    field: Field,
) -> Option<Elt> {
    let _ = mdl_n1;
    let mut acc: Option<(usize, usize, Elt)> = None;
    for f in word {
        let (from, to, e) = match f {
            Factor::Base {
                from,
                to,
                degree,
                index,
            } => {
                let col = mdl_n.section.map(*from, *to).f(*degree).column(*index);
                (
                    *from,
                    *to,
                    Elt {
                        degree: *degree,
                        coords: col,
                    },
                )
            }
            Factor::Gen(c) => {
                let gen = &mdl_n1.gens[*c];
                let coords = gen_values.get(c)?.clone();
                (
                    gen.source,
                    gen.target,
                    Elt {
                        degree: gen.m + 1,
                        coords,
                    },
                )
            }
        };
        acc = Some(match acc {
            None => (from, to, e),
            Some((x, mid, prev)) => {
                debug_assert_eq!(mid, from);
                (x, to, mdl_n.model.compose(x, mid, to, &e, &prev))
            }
        });
    }
    let _ = field;
    acc.map(|(_, _, e)| e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::{cell_category, CellKind};
    use crate::dgcat::is_fibration;

    fn q() -> Field {
        Field::Rationals
    }

    fn point() -> Arc<DgCategory> {
        let field = q();
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
    fn zero_bimodule_gives_base() {
        let a = point();
        let sz = square_zero(&a, Bimodule::zero(a.clone())).unwrap();
        assert_eq!(*sz.total, *a);
    }

    #[test]
    fn scalar_bimodule_extension() {
        // one object, hom = k, M = k in degree 1 with scalar actions
        let a = point();
        let field = q();
        let mh = Complex::line(field, 1, "m");
        let mut lt: ActTable = BTreeMap::new();
        lt.insert(((0, 0), (1, 0)), vec![(0, field.one())]);
        let mut rt: ActTable = BTreeMap::new();
        rt.insert(((1, 0), (0, 0)), vec![(0, field.one())]);
        let mut left = BTreeMap::new();
        left.insert((0, 0, 0), lt);
        let mut right = BTreeMap::new();
        right.insert((0, 0, 0), rt);
        let m = Bimodule {
            over: a.clone(),
            homs: vec![mh],
            left,
            right,
        };
        assert!(m.validate().is_empty(), "{:?}", m.validate());
        let sz = square_zero(&a, m).unwrap();
        assert_eq!(sz.total.hom(0, 0).dim(0), 1);
        assert_eq!(sz.total.hom(0, 0).dim(1), 1);
        assert!(sz.total.validate().is_valid());
        // products of two M-components vanish
        let me = sz.total.basis_elt(0, 0, (1, 0));
        let prod = sz.total.compose(0, 0, 0, &me, &me);
        assert!(prod.is_zero());
        assert!(is_fibration(&sz.projection).unwrap().verdict.holds());
    }

    #[test]
    fn hn_bimodule_examples() {
        // H_1 = 0 everywhere → zero bimodule
        let a = point();
        let mdl = bounded_big_model(&a, 0, 3).unwrap();
        let m = hn_bimodule(&a, &mdl.small, &mdl.small_section, 0).unwrap();
        assert!(m.is_zero());
        // sphere in degree 1: M(1,2) = k in degree 2, scalar actions
        let c = cell_category(q(), CellKind::Sphere, 1).unwrap();
        let mdl = bounded_big_model(&c, 0, 3).unwrap();
        let m = hn_bimodule(&c, &mdl.small, &mdl.small_section, 0).unwrap();
        assert_eq!(m.hom(0, 1).dim(2), 1);
        assert!(m.hom(1, 0).is_zero_complex());
        assert!(m.validate().is_empty(), "{:?}", m.validate());
        // id acts as identity was already validated; check one action value
        let me = basis(q(), 2, 1, 0);
        let id2 = mdl.small.id(1);
        assert_eq!(m.act_left(0, 1, 1, &id2, &me), me);
    }

    #[test]
    fn gamma_on_sphere_hits_the_class() {
        let c = cell_category(q(), CellKind::Sphere, 1).unwrap();
        let mdl = bounded_big_model(&c, 0, 4).unwrap();
        let k = gamma(&mdl).unwrap();
        // one generator, and its class is a basis vector of M(1,2)
        let pair = 0 * c.nobj() + 1;
        assert_eq!(k.m_component[pair].rank(), 1);
        assert!(k.functor.validate().is_valid());
        // triangle: projection ∘ γ = comparison
        let tri = k.extension.projection.compose(&k.functor).unwrap();
        for (x, y) in mdl.model.pairs() {
            for deg in mdl.model.hom(x, y).support() {
                assert_eq!(tri.map(x, y).f(deg), mdl.comparison.map(x, y).f(deg));
            }
        }
        // the k-invariant is a fibration
        assert!(is_fibration(&k.functor).unwrap().verdict.holds());
    }

    #[test]
    fn gamma_trivial_when_no_h1() {
        let a = point();
        let mdl = bounded_big_model(&a, 0, 3).unwrap();
        let k = gamma(&mdl).unwrap();
        assert!(k.bimodule.is_zero());
        for m in &k.m_component {
            assert!(m.is_zero());
        }
    }

    #[test]
    fn fiber_sequence_collapsed() {
        let a = point();
        let rep = verify_fiber_sequence(&a, 0, 4).unwrap();
        assert!(rep.ok(), "{:?}", rep.details);
    }

    #[test]
    fn fiber_sequence_sphere() {
        let c = cell_category(q(), CellKind::Sphere, 1).unwrap();
        let rep = verify_fiber_sequence(&c, 0, 4).unwrap();
        assert!(rep.ok(), "{:?}", rep.details);
    }

    #[test]
    fn fiber_sequence_dual_numbers() {
        let a = dual_numbers();
        let rep = verify_fiber_sequence(&a, 0, 5).unwrap();
        assert!(rep.ok(), "{:?}", rep.details);
    }
}
