//! Heap/context compatibility.

use thiserror::Error;

use crate::algebra::{Algebra, AlgebraError, Grade, UsageVector};
use crate::check::{synth_config, synth_pts, CheckError, PtsSpec};
use crate::syntax::{Entry, GradedContext, Name, Term};

use super::Heap;

/// Which checker types the heap's definitions.
#[derive(Clone, Copy, Debug)]
pub enum Fragment<'a> {
    Simple,
    /// Definitions are visible to conversion while checking later bindings.
    Pts { spec: &'a PtsSpec, fuel: u64 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompatError {
    #[error("the heap has {heap} bindings but the context has {ctx}")]
    Length { heap: usize, ctx: usize },
    #[error("position {index}: the heap binds `{heap}` but the context binds `{ctx}`")]
    Misaligned { index: usize, heap: Name, ctx: Name },
    #[error("`{var}` has a context definition that differs from its heap definition")]
    Definition { var: Name },
    #[error("`{var}` is held at {weight}, which cannot fund a demand of {demand}")]
    Residual { var: Name, weight: Grade, demand: Grade },
    #[error("the definition of `{var}` does not check: {source}")]
    IllTyped { var: Name, source: CheckError },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `H ⊨ Γ`. Walking from the last binding, each weight must cover the
/// demand accumulated on its name; the binding's own principal usage at its
/// weight is then added to the earlier names.
pub fn compatible(alg: &Algebra, fragment: Fragment<'_>, h: &Heap, ctx: &GradedContext) -> Result<(), CompatError> {
    if h.len() != ctx.len() {
        return Err(CompatError::Length { heap: h.len(), ctx: ctx.len() });
    }
    for (i, (b, e)) in h.bindings().iter().zip(ctx.entries()).enumerate() {
        if b.name != e.name {
            return Err(CompatError::Misaligned { index: i, heap: b.name.clone(), ctx: e.name.clone() });
        }
        if e.def.as_ref().is_some_and(|d| !d.alpha_eq(&b.term)) {
            return Err(CompatError::Definition { var: b.name.clone() });
        }
    }
    let usage = binding_usage(alg, fragment, h, ctx)?;
    let top: Vec<Grade> = ctx.entries().iter().map(|e| e.grade.clone()).collect();
    compatible_demands(alg, h, &top, &usage)
}

pub fn is_compatible(alg: &Algebra, fragment: Fragment<'_>, h: &Heap, ctx: &GradedContext) -> bool {
    compatible(alg, fragment, h, ctx).is_ok()
}

fn binding_usage(
    alg: &Algebra,
    fragment: Fragment<'_>,
    h: &Heap,
    ctx: &GradedContext,
) -> Result<Vec<UsageVector>, CompatError> {
    match fragment {
        Fragment::Simple => {
            let bindings: Vec<_> = h
                .bindings()
                .iter()
                .zip(ctx.entries())
                .map(|(b, e)| (b.name.clone(), b.grade.clone(), b.term.clone(), Some(e.ty.clone())))
                .collect();
            let typing = synth_config(alg, &bindings, &Term::Unit, &alg.one(), None).map_err(|source| {
                CompatError::IllTyped { var: culprit(alg, &bindings), source }
            })?;
            Ok(typing.binding_usage)
        }
        Fragment::Pts { spec, fuel } => {
            let mut prefix = GradedContext::new();
            let mut out = Vec::new();
            for (b, e) in h.bindings().iter().zip(ctx.entries()) {
                let res = synth_pts(spec, alg, &prefix, &b.term, &b.grade, Some(&e.ty), fuel)
                    .map_err(|source| CompatError::IllTyped { var: b.name.clone(), source })?;
                out.push(res.principal);
                prefix
                    .push(Entry { name: b.name.clone(), grade: b.grade.clone(), ty: e.ty.clone(), def: Some(b.term.clone()) })
                    .expect("heap names are unique");
            }
            Ok(out)
        }
    }
}

/// The first binding whose prefix fails to check.
fn culprit(alg: &Algebra, bindings: &[crate::check::ConfigBinding]) -> Name {
    (1..=bindings.len())
        .find(|&n| synth_config(alg, &bindings[..n], &Term::Unit, &alg.one(), None).is_err())
        .map(|n| bindings[n - 1].0.clone())
        .unwrap_or_default()
}

/// The backward pass of compatibility, given each binding's usage over the
/// earlier names and the demands `top` of the context itself.
pub fn compatible_demands(alg: &Algebra, h: &Heap, top: &[Grade], usage: &[UsageVector]) -> Result<(), CompatError> {
    let mut need = top.to_vec();
    for i in (0..h.len()).rev() {
        let b = &h.bindings()[i];
        if alg.residual(&b.grade, &need[i])?.is_none() {
            return Err(CompatError::Residual { var: b.name.clone(), weight: b.grade.clone(), demand: need[i].clone() });
        }
        for (j, (_, g)) in usage[i].entries.iter().enumerate() {
            need[j] = alg.add(&need[j], g)?;
        }
    }
    Ok(())
}
