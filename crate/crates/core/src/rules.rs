//! Maps cells to valuations over the scenario's atomic propositions and
//! builds the traffic rules checked against each semantic trace.
//!
//! Atoms: per obstacle `o` the position atoms `f_o`, `b_o`, `l_o`, `r_o`
//! (exactly one true per instant), the road atoms `R_cw` / `R_pc` (exactly
//! one true), and the scene-wide `CONGESTED` flag (constant over the trace).
//! The built-in rules cover overtaking-side restrictions (R1), the crosswalk
//! overtaking ban (R2) and pedestrian priority at crosswalks (R3); additional
//! rules can be registered from rule files without recompilation.

use serde::Deserialize;
use thiserror::Error;

use crate::ltl::{parse, Formula, LtlError, SemanticTrace};
use crate::partition::{Cell, Relation};
use crate::scenario::{Obstacle, ObstacleKind, RoadType, Scenario};

pub const ATOM_CONGESTED: &str = "CONGESTED";
pub const ATOM_ROAD_CW: &str = "R_cw";
pub const ATOM_ROAD_PC: &str = "R_pc";

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("rule {rule} applies to {expected:?} but obstacle {id} is a {actual:?}")]
    KindMismatch { rule: &'static str, id: String, expected: ObstacleKind, actual: ObstacleKind },
    #[error("rules file parse error: {0}")]
    File(#[from] serde_yaml::Error),
    #[error("rule {name}: formula error: {source}")]
    Formula { name: String, source: LtlError },
}

/// Position atom name for one obstacle, e.g. `b_o1`.
pub fn position_atom(relation: Relation, obstacle_id: &str) -> String {
    format!("{}_{}", relation.letter(), obstacle_id)
}

/// The ordered atomic propositions of a scenario: four position atoms per
/// obstacle (obstacle order), then the road atoms, then `CONGESTED`.
#[derive(Debug, Clone)]
pub struct PropositionSet {
    atoms: Vec<String>,
    obstacle_ids: Vec<String>,
}

impl PropositionSet {
    pub fn for_scenario(scenario: &Scenario) -> Self {
        let mut atoms = Vec::new();
        for o in &scenario.obstacles {
            for rel in [Relation::Behind, Relation::Front, Relation::Left, Relation::Right] {
                atoms.push(position_atom(rel, &o.id));
            }
        }
        atoms.push(ATOM_ROAD_CW.to_string());
        atoms.push(ATOM_ROAD_PC.to_string());
        atoms.push(ATOM_CONGESTED.to_string());
        Self { atoms, obstacle_ids: scenario.obstacles.iter().map(|o| o.id.clone()).collect() }
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    /// Valuation of one cell: for obstacle i with signature letter x, atom
    /// `x_{o_i}` is true and the other three position atoms are false; the
    /// road atom follows the cell's road type and `CONGESTED` the flag.
    pub fn valuation_of(&self, cell: &Cell, congested: bool) -> Vec<bool> {
        assert_eq!(
            cell.signature.relations.len(),
            self.obstacle_ids.len(),
            "signature length must equal obstacle count"
        );
        let mut values = Vec::with_capacity(self.atoms.len());
        for rel in &cell.signature.relations {
            for candidate in [Relation::Behind, Relation::Front, Relation::Left, Relation::Right] {
                values.push(*rel == candidate);
            }
        }
        values.push(cell.signature.road_type == RoadType::Carriageway);
        values.push(cell.signature.road_type == RoadType::PedestrianCrosswalk);
        values.push(congested);
        values
    }

    /// Semantic trace of a cell sequence (one valuation per cell, in order).
    pub fn trace_of(&self, cells: &[&Cell], congested: bool) -> Result<SemanticTrace, LtlError> {
        SemanticTrace::new(
            self.atoms.clone(),
            cells.iter().map(|c| self.valuation_of(c, congested)).collect(),
        )
    }
}

/// A named rule instantiated for one obstacle.
#[derive(Debug, Clone)]
pub struct RuleSpec {
    pub name: String,
    pub applies_to: ObstacleKind,
    pub obstacle_id: String,
    pub formula: Formula,
}

fn expect_kind(
    rule: &'static str,
    obstacle: &Obstacle,
    expected: ObstacleKind,
) -> Result<(), RuleError> {
    if obstacle.kind != expected {
        return Err(RuleError::KindMismatch {
            rule,
            id: obstacle.id.clone(),
            expected,
            actual: obstacle.kind,
        });
    }
    Ok(())
}

/// R1: do not overtake a vehicle on its right side, except in congested
/// traffic: `!CONGESTED -> G !(b_v & X (b_v U (r_v U f_v)))`.
pub fn rule_r1(vehicle: &Obstacle) -> Result<RuleSpec, RuleError> {
    expect_kind("R1", vehicle, ObstacleKind::Vehicle)?;
    let b = Formula::atom(position_atom(Relation::Behind, &vehicle.id));
    let r = Formula::atom(position_atom(Relation::Right, &vehicle.id));
    let f = Formula::atom(position_atom(Relation::Front, &vehicle.id));
    let formula = Formula::implies(
        Formula::not(Formula::atom(ATOM_CONGESTED)),
        Formula::globally(Formula::not(Formula::and(
            b.clone(),
            Formula::next(Formula::until(b, Formula::until(r, f))),
        ))),
    );
    Ok(RuleSpec {
        name: format!("R1({})", vehicle.id),
        applies_to: ObstacleKind::Vehicle,
        obstacle_id: vehicle.id.clone(),
        formula,
    })
}

/// R2: do not overtake a vehicle immediately in front of a pedestrian
/// crosswalk: `G !(b_v & X (b_v U (l_v U (f_v & R_pc))))`.
pub fn rule_r2(vehicle: &Obstacle) -> Result<RuleSpec, RuleError> {
    expect_kind("R2", vehicle, ObstacleKind::Vehicle)?;
    let b = Formula::atom(position_atom(Relation::Behind, &vehicle.id));
    let l = Formula::atom(position_atom(Relation::Left, &vehicle.id));
    let f = Formula::atom(position_atom(Relation::Front, &vehicle.id));
    let formula = Formula::globally(Formula::not(Formula::and(
        b.clone(),
        Formula::next(Formula::until(
            b,
            Formula::until(l, Formula::and(f, Formula::atom(ATOM_ROAD_PC))),
        )),
    )));
    Ok(RuleSpec {
        name: format!("R2({})", vehicle.id),
        applies_to: ObstacleKind::Vehicle,
        obstacle_id: vehicle.id.clone(),
        formula,
    })
}

/// R3: never occupy a crosswalk in front of a pedestrian:
/// `G !(R_pc & f_p)`.
pub fn rule_r3(pedestrian: &Obstacle) -> Result<RuleSpec, RuleError> {
    expect_kind("R3", pedestrian, ObstacleKind::Pedestrian)?;
    let formula = Formula::globally(Formula::not(Formula::and(
        Formula::atom(ATOM_ROAD_PC),
        Formula::atom(position_atom(Relation::Front, &pedestrian.id)),
    )));
    Ok(RuleSpec {
        name: format!("R3({})", pedestrian.id),
        applies_to: ObstacleKind::Pedestrian,
        obstacle_id: pedestrian.id.clone(),
        formula,
    })
}

/// A rule pattern that instantiates per matching obstacle. In the template
/// formula, the bare atoms `f`, `b`, `l`, `r` (and any suffixed variant such
/// as `f_v`) refer to the target obstacle and are rewritten to its id; road
/// and global atoms pass through unchanged.
#[derive(Debug, Clone)]
pub struct RuleTemplate {
    pub name: String,
    pub applies_to: ObstacleKind,
    pub formula: Formula,
}

impl RuleTemplate {
    pub fn instantiate(&self, obstacle: &Obstacle) -> RuleSpec {
        RuleSpec {
            name: format!("{}({})", self.name, obstacle.id),
            applies_to: self.applies_to,
            obstacle_id: obstacle.id.clone(),
            formula: rewrite_position_atoms(&self.formula, &obstacle.id),
        }
    }
}

fn rewrite_position_atoms(formula: &Formula, obstacle_id: &str) -> Formula {
    match formula {
        Formula::Atom(name) => {
            let mut chars = name.chars();
            let first = chars.next();
            let rest: String = chars.collect();
            let is_position = matches!(first, Some('f' | 'b' | 'l' | 'r'))
                && (rest.is_empty() || rest.starts_with('_'))
                && name != ATOM_CONGESTED;
            if is_position {
                Formula::Atom(format!("{}_{obstacle_id}", first.unwrap()))
            } else {
                formula.clone()
            }
        }
        Formula::True | Formula::False => formula.clone(),
        Formula::Not(f) => Formula::not(rewrite_position_atoms(f, obstacle_id)),
        Formula::Next(f) => Formula::next(rewrite_position_atoms(f, obstacle_id)),
        Formula::Globally(f) => Formula::globally(rewrite_position_atoms(f, obstacle_id)),
        Formula::Finally(f) => Formula::finally(rewrite_position_atoms(f, obstacle_id)),
        Formula::And(a, b) => Formula::and(
            rewrite_position_atoms(a, obstacle_id),
            rewrite_position_atoms(b, obstacle_id),
        ),
        Formula::Or(a, b) => Formula::or(
            rewrite_position_atoms(a, obstacle_id),
            rewrite_position_atoms(b, obstacle_id),
        ),
        Formula::Implies(a, b) => Formula::implies(
            rewrite_position_atoms(a, obstacle_id),
            rewrite_position_atoms(b, obstacle_id),
        ),
        Formula::Until(a, b) => Formula::until(
            rewrite_position_atoms(a, obstacle_id),
            rewrite_position_atoms(b, obstacle_id),
        ),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFileEntry {
    name: String,
    applies_to: ObstacleKind,
    formula: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    rules: Vec<RuleFileEntry>,
}

/// Parses user-defined rule templates from a rules file.
pub fn load_rule_templates(text: &str) -> Result<Vec<RuleTemplate>, RuleError> {
    let file: RuleFile = serde_yaml::from_str(text)?;
    file.rules
        .into_iter()
        .map(|entry| {
            let formula = parse(&entry.formula)
                .map_err(|source| RuleError::Formula { name: entry.name.clone(), source })?;
            Ok(RuleTemplate { name: entry.name, applies_to: entry.applies_to, formula })
        })
        .collect()
}

/// Rule catalog: the built-in rules plus any registered templates.
#[derive(Debug, Clone, Default)]
pub struct RuleCatalog {
    extra: Vec<RuleTemplate>,
}

impl RuleCatalog {
    pub fn builtin() -> Self {
        Self::default()
    }

    pub fn register(&mut self, template: RuleTemplate) {
        self.extra.push(template);
    }

    /// All rules instantiated for a scenario, in deterministic order:
    /// obstacle index first, then rule number (built-ins before extras).
    pub fn rules_for(&self, scenario: &Scenario) -> Vec<RuleSpec> {
        let mut out = Vec::new();
        for o in &scenario.obstacles {
            match o.kind {
                ObstacleKind::Vehicle => {
                    out.push(rule_r1(o).expect("kind checked"));
                    out.push(rule_r2(o).expect("kind checked"));
                }
                ObstacleKind::Pedestrian => {
                    out.push(rule_r3(o).expect("kind checked"));
                }
                // No built-in rules for cyclists or rail-borne participants;
                // they still shape the partition geometry.
                ObstacleKind::Cyclist | ObstacleKind::Railborne => {}
            }
            for template in &self.extra {
                if template.applies_to == o.kind {
                    out.push(template.instantiate(o));
                }
            }
        }
        out
    }
}

/// Built-in rules only (R1/R2 per vehicle, R3 per pedestrian).
pub fn rules_for(scenario: &Scenario) -> Vec<RuleSpec> {
    RuleCatalog::builtin().rules_for(scenario)
}
