use serde::Serialize;

use super::{AlgoConfig, Campaign, CampaignError, Evaluation, ParameterGrid};
use crate::gp::KernelSpec;

/// Kernel attenuation applied to each previous context when moving to a new one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    pub new_context: Vec<f64>,
    pub entries: Vec<TransferEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferEntry {
    pub context: Vec<f64>,
    pub observations: usize,
    /// `k_φ(z, z′)` of the objective kernel.
    pub objective_factor: f64,
    /// `k_φ(z, z′)` of the constraint kernel.
    pub constraint_factor: f64,
}

/// Starts a campaign at `new_context` seeded with contextual evaluations
/// from earlier operating points.
pub fn transfer_context(
    previous: &[Evaluation],
    new_context: &[f64],
    grid: &ParameterGrid,
    objective_spec: &KernelSpec,
    constraint_spec: &KernelSpec,
    config: &AlgoConfig,
) -> Result<(Campaign, TransferReport), CampaignError> {
    let report = transfer_report(previous, new_context, objective_spec, constraint_spec)?;
    let grid = grid.clone().with_context(Some(new_context.to_vec()));
    let campaign = Campaign::from_transfer(
        previous,
        grid,
        objective_spec.clone(),
        constraint_spec.clone(),
        config.clone(),
    )?;
    Ok((campaign, report))
}

pub fn transfer_report(
    previous: &[Evaluation],
    new_context: &[f64],
    objective_spec: &KernelSpec,
    constraint_spec: &KernelSpec,
) -> Result<TransferReport, CampaignError> {
    let mut entries: Vec<TransferEntry> = Vec::new();
    for e in previous {
        let z = e.context.as_ref().ok_or_else(|| {
            CampaignError::Input(format!("previous evaluation at {:?} carries no context tag", e.point))
        })?;
        if let Some(entry) = entries.iter_mut().find(|x| &x.context == z) {
            entry.observations += 1;
            continue;
        }
        entries.push(TransferEntry {
            context: z.clone(),
            observations: 1,
            objective_factor: objective_spec.context_factor(z, new_context)?,
            constraint_factor: constraint_spec.context_factor(z, new_context)?,
        });
    }
    Ok(TransferReport { new_context: new_context.to_vec(), entries })
}
