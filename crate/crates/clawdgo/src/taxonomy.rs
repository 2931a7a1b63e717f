//! Fixed registry of the three-layer awareness taxonomy: 3 protection layers,
//! 4 dimensions each, in a canonical order used as the universal tie-break
//! everywhere else in the crate.

use serde::{Deserialize, Serialize};

/// One of the three protection layers, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LayerId {
    SelfDefence,
    OwnerProtection,
    EnterpriseSecurity,
}

impl LayerId {
    pub const ALL: [LayerId; 3] = [
        LayerId::SelfDefence,
        LayerId::OwnerProtection,
        LayerId::EnterpriseSecurity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LayerId::SelfDefence => "Self-Defence",
            LayerId::OwnerProtection => "Owner-Protection",
            LayerId::EnterpriseSecurity => "Enterprise-Security",
        }
    }
}

/// One of the twelve trainable awareness dimensions.
///
/// Variant order is the canonical order (S1..S4, O1..O4, E1..E4); the derived
/// `Ord` therefore *is* the canonical tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum DimensionId {
    S1,
    S2,
    S3,
    S4,
    O1,
    O2,
    O3,
    O4,
    E1,
    E2,
    E3,
    E4,
}

impl DimensionId {
    pub const ALL: [DimensionId; 12] = [
        DimensionId::S1,
        DimensionId::S2,
        DimensionId::S3,
        DimensionId::S4,
        DimensionId::O1,
        DimensionId::O2,
        DimensionId::O3,
        DimensionId::O4,
        DimensionId::E1,
        DimensionId::E2,
        DimensionId::E3,
        DimensionId::E4,
    ];

    /// Canonical index, a bijection onto `0..12`.
    pub fn canonical_index(self) -> usize {
        Self::ALL.iter().position(|d| *d == self).unwrap()
    }

    /// Inverse of [`canonical_index`](Self::canonical_index).
    pub fn from_canonical_index(index: usize) -> Option<DimensionId> {
        Self::ALL.get(index).copied()
    }

    /// Layer is determined by the prefix letter.
    pub fn layer(self) -> LayerId {
        match self {
            DimensionId::S1 | DimensionId::S2 | DimensionId::S3 | DimensionId::S4 => {
                LayerId::SelfDefence
            }
            DimensionId::O1 | DimensionId::O2 | DimensionId::O3 | DimensionId::O4 => {
                LayerId::OwnerProtection
            }
            DimensionId::E1 | DimensionId::E2 | DimensionId::E3 | DimensionId::E4 => {
                LayerId::EnterpriseSecurity
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DimensionId::S1 => "S1",
            DimensionId::S2 => "S2",
            DimensionId::S3 => "S3",
            DimensionId::S4 => "S4",
            DimensionId::O1 => "O1",
            DimensionId::O2 => "O2",
            DimensionId::O3 => "O3",
            DimensionId::O4 => "O4",
            DimensionId::E1 => "E1",
            DimensionId::E2 => "E2",
            DimensionId::E3 => "E3",
            DimensionId::E4 => "E4",
        }
    }

    pub fn parse(s: &str) -> Option<DimensionId> {
        Self::ALL.iter().copied().find(|d| d.as_str() == s)
    }
}

impl std::fmt::Display for DimensionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Registry entry for one dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimension {
    pub id: DimensionId,
    pub layer: LayerId,
    pub name: &'static str,
    pub description: &'static str,
}

/// Descriptions are artifact-authored summaries; the dimension names are the
/// fixed taxonomy names.
static REGISTRY: [Dimension; 12] = [
    Dimension {
        id: DimensionId::S1,
        layer: LayerId::SelfDefence,
        name: "prompt injection",
        description: "Recognising instructions smuggled into untrusted content that try to override the agent's task or policies.",
    },
    Dimension {
        id: DimensionId::S2,
        layer: LayerId::SelfDefence,
        name: "memory poisoning",
        description: "Detecting attempts to plant false or malicious context into the agent's persistent memory or session state.",
    },
    Dimension {
        id: DimensionId::S3,
        layer: LayerId::SelfDefence,
        name: "supply-chain attacks",
        description: "Judging the provenance and integrity of skills, packages, and updates before granting them trust.",
    },
    Dimension {
        id: DimensionId::S4,
        layer: LayerId::SelfDefence,
        name: "credential misuse",
        description: "Guarding tokens, keys, and session credentials against exfiltration or use outside their intended scope.",
    },
    Dimension {
        id: DimensionId::O1,
        layer: LayerId::OwnerProtection,
        name: "phishing relay",
        description: "Refusing to draft, forward, or lend credibility to phishing content aimed at the owner or their contacts.",
    },
    Dimension {
        id: DimensionId::O2,
        layer: LayerId::OwnerProtection,
        name: "social engineering",
        description: "Spotting authority, urgency, and secrecy pressure used to manipulate the agent into acting against the owner.",
    },
    Dimension {
        id: DimensionId::O3,
        layer: LayerId::OwnerProtection,
        name: "privacy leakage",
        description: "Preventing disclosure of the owner's personal data beyond the minimum an authorised task requires.",
    },
    Dimension {
        id: DimensionId::O4,
        layer: LayerId::OwnerProtection,
        name: "unsafe network exposure",
        description: "Avoiding actions that open the owner's machines or accounts to unsolicited inbound access.",
    },
    Dimension {
        id: DimensionId::E1,
        layer: LayerId::EnterpriseSecurity,
        name: "data handling",
        description: "Applying classification, retention, and transfer rules when moving organisational data between systems.",
    },
    Dimension {
        id: DimensionId::E2,
        layer: LayerId::EnterpriseSecurity,
        name: "compliance",
        description: "Checking that requested actions respect regulatory and internal-policy constraints before executing them.",
    },
    Dimension {
        id: DimensionId::E3,
        layer: LayerId::EnterpriseSecurity,
        name: "insider risk",
        description: "Noticing privilege abuse, unusual access patterns, and data staging by otherwise-authorised identities.",
    },
    Dimension {
        id: DimensionId::E4,
        layer: LayerId::EnterpriseSecurity,
        name: "incident response",
        description: "Escalating suspected compromises promptly, preserving evidence, and containing blast radius.",
    },
];

/// All 12 dimensions in canonical order. The registry is immutable.
pub fn all_dimensions() -> &'static [Dimension; 12] {
    &REGISTRY
}

/// Registry entry for `id`. Total over the enumeration.
pub fn dimension_of(id: DimensionId) -> &'static Dimension {
    &REGISTRY[id.canonical_index()]
}

/// Machine-readable registry export, one record per dimension.
///
/// `description_source` marks the rubric descriptions as artifact-authored
/// summaries rather than taxonomy-fixed text.
pub fn registry_export() -> serde_json::Value {
    serde_json::json!({
        "taxonomy": "three-layer",
        "description_source": "artifact-authored",
        "dimensions": REGISTRY.iter().map(|d| {
            serde_json::json!({
                "id": d.id,
                "layer": d.layer,
                "name": d.name,
                "description": d.description,
            })
        }).collect::<Vec<_>>(),
    })
}
