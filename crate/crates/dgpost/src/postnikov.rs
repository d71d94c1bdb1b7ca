//! The small tower: stage n truncates every hom complex at degree n, with
//! the induced composition. Stages come with surjections from the base and
//! transition functors down the tower.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::complexes::{homology, induced_on_homology, truncate_leq, ChainMap, Complex};
use crate::dgcat::{
    h0_fully_faithful, is_fibration, CompTable, DgCategory, DgFunctor, Elt, Verdict,
};
use crate::error::{Error, Result};
use crate::exactlin::{Matrix, Scalar};

pub struct Tower {
    pub base: Arc<DgCategory>,
    pub cap: i64,
    /// stages[n] for n = 0..=cap.
    pub stages: Vec<Arc<DgCategory>>,
    /// sections[n]: base → stages[n].
    pub sections: Vec<DgFunctor>,
    /// transitions[n]: stages[n+1] → stages[n].
    pub transitions: Vec<DgFunctor>,
}

/// One stage: truncate homs at degree n, induce composition through chosen
/// right inverses of the projections (well defined because the truncation
/// kernel is generated by boundaries in the top degree).
pub(crate) fn stage(a: &Arc<DgCategory>, n: i64) -> Result<(Arc<DgCategory>, DgFunctor)> {
    let field = a.field;
    let nobj = a.nobj();
    let mut homs = Vec::new();
    let mut projs = Vec::new();
    let mut sects: Vec<BTreeMap<i64, Matrix>> = Vec::new();
    for (x, y) in a.pairs() {
        let (tc, proj) = truncate_leq(a.hom(x, y), n)?;
        let mut sect = BTreeMap::new();
        for deg in tc.support() {
            let q = tc.dim(deg);
            if q == 0 {
                continue;
            }
            let r = proj
                .f(deg)
                .solve_matrix(&Matrix::identity(field, q))?
                .ok_or_else(|| Error::Internal("truncation projection not surjective".into()))?;
            sect.insert(deg, r);
        }
        homs.push(tc);
        projs.push(proj);
        sects.push(sect);
        let _ = (x, y);
    }
    let mut comp = BTreeMap::new();
    for x in 0..nobj {
        for y in 0..nobj {
            for z in 0..nobj {
                let hg = &homs[y * nobj + z];
                let hf = &homs[x * nobj + y];
                let hr = &homs[x * nobj + z];
                let mut table: CompTable = BTreeMap::new();
                for dg in hg.support() {
                    for gi in 0..hg.dim(dg) {
                        let g_lift = Elt {
                            degree: dg,
                            coords: sects[y * nobj + z][&dg].column(gi),
                        };
                        for df in hf.support() {
                            if hr.dim(dg + df) == 0 {
                                continue;
                            }
                            for fi in 0..hf.dim(df) {
                                let f_lift = Elt {
                                    degree: df,
                                    coords: sects[x * nobj + y][&df].column(fi),
                                };
                                let prod = a.compose(x, y, z, &g_lift, &f_lift);
                                let down = projs[x * nobj + z].f(dg + df).mul_vec(&prod.coords);
                                let val: Vec<(usize, Scalar)> = down
                                    .into_iter()
                                    .enumerate()
                                    .filter(|(_, s)| !s.is_zero())
                                    .collect();
                                if !val.is_empty() {
                                    table.insert(((dg, gi), (df, fi)), val);
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
    let ids = (0..nobj)
        .map(|x| projs[x * nobj + x].f(0).mul_vec(&a.id(x).coords))
        .collect();
    let cat = Arc::new(DgCategory::new(
        field,
        a.objects.clone(),
        homs,
        comp,
        ids,
    )?);
    let maps = (0..nobj * nobj).map(|i| projs[i].clone()).collect();
    let section = DgFunctor::new(a.clone(), cat.clone(), (0..nobj).collect(), maps)?;
    Ok((cat, section))
}

pub fn small_tower(a: &Arc<DgCategory>, cap: i64) -> Result<Tower> {
    if !a.is_positively_graded() {
        return Err(Error::CategoryNotPositivelyGraded);
    }
    if cap < 0 {
        return Err(Error::InvalidCategory("tower cap must be ≥ 0".into()));
    }
    let mut stages = Vec::new();
    let mut sections = Vec::new();
    for n in 0..=cap {
        let (cat, section) = stage(a, n)?;
        stages.push(cat);
        sections.push(section);
    }
    let nobj = a.nobj();
    let mut transitions = Vec::new();
    for n in 0..cap as usize {
        let upper = &stages[n + 1];
        let lower = &stages[n];
        let maps = upper
            .pairs()
            .map(|(x, y)| {
                // degrees < n are untouched in both stages; degree n maps by
                // the further quotient; degree n+1 dies
                let src = upper.hom(x, y);
                let tgt = lower.hom(x, y);
                let up = sections[n + 1].map(x, y);
                let down = sections[n].map(x, y);
                let mut maps = Vec::new();
                for deg in src.support() {
                    let r = up
                        .f(deg)
                        .solve_matrix(&Matrix::identity(a.field, src.dim(deg)))?
                        .ok_or_else(|| Error::Internal("stage projection".into()))?;
                    maps.push((deg, down.f(deg).mul(&r)));
                }
                ChainMap::new(src.clone(), tgt.clone(), maps)
            })
            .collect::<Result<Vec<_>>>()?;
        transitions.push(DgFunctor::new(
            upper.clone(),
            lower.clone(),
            (0..nobj).collect(),
            maps,
        )?);
    }
    Ok(Tower {
        base: a.clone(),
        cap,
        stages,
        sections,
        transitions,
    })
}

#[derive(Clone, Debug)]
pub struct StageReport {
    pub stage: i64,
    /// homology of the section is an isomorphism in degrees ≤ n
    pub a1: bool,
    /// H₀ of the section is an equivalence
    pub a2: bool,
    /// homology of the stage vanishes above n
    pub b: bool,
    pub category_valid: bool,
    pub functor_valid: bool,
    /// fibration verdict for the transition into the previous stage
    pub transition_fibration: Option<Verdict>,
}

#[derive(Clone, Debug)]
pub struct TowerReport {
    pub stages: Vec<StageReport>,
    pub ok: bool,
}

pub fn validate_tower(t: &Tower) -> Result<TowerReport> {
    let mut out = Vec::new();
    let mut ok = true;
    for (ni, cat) in t.stages.iter().enumerate() {
        let n = ni as i64;
        let section = &t.sections[ni];
        let mut a1 = true;
        let mut b = true;
        for (x, y) in t.base.pairs() {
            let m = section.map(x, y);
            let hs = homology(&m.source);
            let ht = homology(&m.target);
            let lo = *m.source.support().start().min(m.target.support().start());
            let hi = *m.source.support().end().max(m.target.support().end());
            for i in lo..=hi {
                if i <= n {
                    let ind = induced_on_homology(&hs, &ht, m, i);
                    if hs.h_dim(i) != ht.h_dim(i) || ind.rank() != hs.h_dim(i) {
                        a1 = false;
                    }
                } else if ht.h_dim(i) != 0 {
                    b = false;
                }
            }
        }
        let a2 = section.is_identity_on_objects() && h0_fully_faithful(section);
        let category_valid = cat.validate().is_valid();
        let functor_valid = section.validate().is_valid();
        let transition_fibration = if ni > 0 {
            Some(is_fibration(&t.transitions[ni - 1])?.verdict)
        } else {
            None
        };
        let stage_ok = a1
            && a2
            && b
            && category_valid
            && functor_valid
            && transition_fibration.map_or(true, |v| v.holds());
        if !stage_ok {
            ok = false;
        }
        out.push(StageReport {
            stage: n,
            a1,
            a2,
            b,
            category_valid,
            functor_valid,
            transition_fibration,
        });
    }
    Ok(TowerReport { stages: out, ok })
}

#[derive(Clone, Debug)]
pub struct ReconstructionReport {
    pub isomorphic: bool,
    pub mismatches: Vec<String>,
}

/// Assemble the degreewise limit of the stages: degree-i data is read from
/// stage min(i+1, N), where it has stabilized, and compared to the base.
pub fn reconstruct(t: &Tower) -> Result<(DgCategory, ReconstructionReport)> {
    let field = t.base.field;
    let nobj = t.base.nobj();
    for (x, y) in t.base.pairs() {
        let hi = *t.base.hom(x, y).support().end();
        if hi > t.cap {
            return Err(Error::CapTooSmall {
                cap: t.cap,
                why: format!(
                    "hom({},{}) supported up to degree {hi}",
                    t.base.objects[x], t.base.objects[y]
                ),
            });
        }
    }
    let pick = |i: i64| -> &Arc<DgCategory> {
        let s = (i + 1).min(t.cap).max(0) as usize;
        &t.stages[s]
    };
    let mut homs = Vec::new();
    for (x, y) in t.base.pairs() {
        let base_hom = t.base.hom(x, y);
        let lo = *base_hom.support().start();
        let hi = *base_hom.support().end();
        let mut dims = Vec::new();
        let mut labels = Vec::new();
        let mut diffs = Vec::new();
        for i in lo..=hi {
            let st = pick(i).hom(x, y);
            dims.push(st.dim(i));
            labels.push(st.labels(i).to_vec());
            diffs.push(st.d(i));
        }
        homs.push(Complex::new(field, lo, dims, labels, diffs)?);
    }
    let mut comp = BTreeMap::new();
    for x in 0..nobj {
        for y in 0..nobj {
            for z in 0..nobj {
                let mut table: CompTable = BTreeMap::new();
                let hg = &homs[y * nobj + z];
                let hf = &homs[x * nobj + y];
                for dg in hg.support() {
                    for gi in 0..hg.dim(dg) {
                        for df in hf.support() {
                            for fi in 0..hf.dim(df) {
                                let st = pick(dg + df);
                                let val = st.compose_basis(x, y, z, (dg, gi), (df, fi));
                                if !val.is_empty() {
                                    table.insert(((dg, gi), (df, fi)), val.to_vec());
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
    let ids = (0..nobj).map(|x| pick(0).id(x).coords).collect();
    let limit = DgCategory::new(field, t.base.objects.clone(), homs, comp, ids)?;
    let mut mismatches = Vec::new();
    if limit != *t.base {
        for (x, y) in t.base.pairs() {
            if limit.hom(x, y) != t.base.hom(x, y) {
                mismatches.push(format!(
                    "hom({},{}) differs",
                    t.base.objects[x], t.base.objects[y]
                ));
            }
        }
        if limit.comp_tables() != t.base.comp_tables() {
            mismatches.push("composition tables differ".into());
        }
        if mismatches.is_empty() {
            mismatches.push("identities or objects differ".into());
        }
    }
    Ok((
        limit,
        ReconstructionReport {
            isomorphic: mismatches.is_empty(),
            mismatches,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::cone_on_identity;
    use crate::dgcat::h0;
    use crate::exactlin::Field;

    fn q() -> Field {
        Field::Rationals
    }

    /// One object, k[ε]/(ε²) with |ε| = 1, d = 0.
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

    /// Two objects with hom(a,b) an acyclic cone, everything else lines.
    fn acyclic_arrow() -> Arc<DgCategory> {
        let field = q();
        let homs = vec![
            Complex::line(field, 0, "ida"),
            cone_on_identity(field, 0),
            Complex::zero(field),
            Complex::line(field, 0, "idb"),
        ];
        let mut comp = BTreeMap::new();
        let unit = |t: &mut CompTable| {
            t.insert(((0, 0), (0, 0)), vec![(0, field.one())]);
        };
        let mut t: CompTable = BTreeMap::new();
        unit(&mut t);
        comp.insert((0, 0, 0), t);
        let mut t: CompTable = BTreeMap::new();
        unit(&mut t);
        comp.insert((1, 1, 1), t);
        let mut t: CompTable = BTreeMap::new();
        unit(&mut t);
        t.insert(((1, 0), (0, 0)), vec![(0, field.one())]);
        comp.insert((0, 0, 1), t);
        let mut t: CompTable = BTreeMap::new();
        unit(&mut t);
        t.insert(((0, 0), (1, 0)), vec![(0, field.one())]);
        comp.insert((0, 1, 1), t);
        Arc::new(
            DgCategory::new(
                field,
                vec!["a".into(), "b".into()],
                homs,
                comp,
                vec![vec![field.one()], vec![field.one()]],
            )
            .unwrap(),
        )
    }

    #[test]
    fn degree_zero_category_tower_is_constant() {
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
        let t = small_tower(&a, 3).unwrap();
        for s in &t.stages {
            assert_eq!(**s, *a);
        }
        let (_, rep) = reconstruct(&t).unwrap();
        assert!(rep.isomorphic);
    }

    #[test]
    fn acyclic_hom_dies_at_stage_zero() {
        let a = acyclic_arrow();
        assert!(a.validate().is_valid(), "{:?}", a.validate().violations);
        let t = small_tower(&a, 2).unwrap();
        assert!(t.stages[0].hom(0, 1).is_zero_complex());
        let rep = validate_tower(&t).unwrap();
        assert!(rep.ok, "{:?}", rep.stages);
        let (_, rrep) = reconstruct(&t).unwrap();
        assert!(rrep.isomorphic, "{:?}", rrep.mismatches);
    }

    #[test]
    fn stage_zero_is_h0() {
        for a in [dual_numbers(), acyclic_arrow()] {
            let t = small_tower(&a, 1).unwrap();
            let (h, _) = h0(&a).unwrap();
            assert_eq!(*t.stages[0], *h.cat);
        }
    }

    #[test]
    fn tower_validates_and_reconstructs() {
        let a = dual_numbers();
        let t = small_tower(&a, 2).unwrap();
        let rep = validate_tower(&t).unwrap();
        assert!(rep.ok, "{:?}", rep.stages);
        assert_eq!(*t.stages[1], *a);
        assert_eq!(*t.stages[2], *a);
        let (limit, rrep) = reconstruct(&t).unwrap();
        assert!(rrep.isomorphic);
        assert_eq!(limit, *a);
    }

    #[test]
    fn cap_below_support_errors() {
        let a = dual_numbers();
        let t = small_tower(&a, 0).unwrap();
        assert!(matches!(
            reconstruct(&t),
            Err(Error::CapTooSmall { .. })
        ));
    }

    #[test]
    fn tampered_stage_fails_a1() {
        let a = dual_numbers();
        let mut t = small_tower(&a, 1).unwrap();
        // zero out the degree-1 component of the stage-1 section; with d = 0
        // this is still a chain map, but no longer a homology iso in degree 1
        let src = a.hom(0, 0).clone();
        let tgt = t.stages[1].hom(0, 0).clone();
        let broken = ChainMap::new(
            src,
            tgt,
            vec![
                (0, Matrix::identity(q(), 1)),
                (1, Matrix::zero(q(), 1, 1)),
            ],
        )
        .unwrap();
        // a DgFunctor with a non-functorial hom map would be rejected by the
        // constructor, so splice the chain map through a hand-built functor
        // with the composition-compatibility violation it entails
        let f = DgFunctor::new(a.clone(), t.stages[1].clone(), vec![0], vec![broken]);
        match f {
            Ok(f) => {
                t.sections[1] = f;
                let rep = validate_tower(&t).unwrap();
                assert!(!rep.stages[1].a1);
                assert!(!rep.ok);
            }
            // rejected as non-functorial: equally a detected violation
            Err(_) => {}
        }
    }

    #[test]
    fn transitions_are_fibrations() {
        let a = acyclic_arrow();
        let t = small_tower(&a, 2).unwrap();
        for tr in &t.transitions {
            assert!(is_fibration(tr).unwrap().verdict.holds());
            assert!(tr.map(0, 1).is_degreewise_surjective());
        }
    }
}
