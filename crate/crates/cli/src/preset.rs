//! Canned configurations for the two reference dataset shapes.

use clap::ValueEnum;
use kgbench::kg::LabelScheme;
use kgbench::miner::MinerConfig;
use kgbench::Ratio;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    /// Kinship-style graphs: short rules, entity ids kept as-is.
    Family,
    /// FB15k-237-scale graphs: rules up to length 4, entities hidden
    /// behind seeded private ids.
    Fb15k237,
}

impl PresetName {
    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Family => "family",
            PresetName::Fb15k237 => "fb15k237",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeKind {
    /// Seeded random bijection onto fresh numeric ids.
    PrivateId,
    /// Keep the dataset's own identifiers.
    EntityId,
    /// Use attached display names (requires a names file).
    TextLabel,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::PrivateId => "private-id",
            SchemeKind::EntityId => "entity-id",
            SchemeKind::TextLabel => "text-label",
        }
    }

    pub fn to_scheme(self, seed: u64) -> LabelScheme {
        match self {
            SchemeKind::PrivateId => LabelScheme::PrivateId { seed },
            SchemeKind::EntityId => LabelScheme::EntityId,
            SchemeKind::TextLabel => LabelScheme::TextLabel,
        }
    }
}

/// One dataset profile: mining thresholds, balancing, split shape, and how
/// entities are rendered in the released files.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: PresetName,
    pub miner: MinerConfig,
    pub tau: Ratio,
    pub per_rule_limit: usize,
    pub split_ratios: (u32, u32, u32),
    pub label_scheme: SchemeKind,
}

impl Preset {
    pub fn resolve(name: PresetName) -> Preset {
        match name {
            PresetName::Family => Preset {
                name,
                miner: MinerConfig::family(),
                tau: Ratio::new(1, 20),
                per_rule_limit: 30,
                split_ratios: (8, 1, 1),
                label_scheme: SchemeKind::EntityId,
            },
            PresetName::Fb15k237 => Preset {
                name,
                miner: MinerConfig::fb15k237(),
                tau: Ratio::new(1, 20),
                per_rule_limit: 30,
                split_ratios: (8, 1, 1),
                label_scheme: SchemeKind::PrivateId,
            },
        }
    }
}
