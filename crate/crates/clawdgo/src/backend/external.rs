//! Declared external-service adapter. Configuration is validated and
//! serialisable, but every role call returns a distinguished
//! not-implemented error: networking is deliberately out of scope.

use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;

use super::{
    AgentBackend, AttackPayload, AttackSpec, BackendError, DefenseContext, DefenseResponse,
    Evaluation,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalAdapterConfig {
    pub endpoint: String,
    pub model_name: String,
    pub timeout_secs: u64,
}

impl ExternalAdapterConfig {
    pub fn new(
        endpoint: &str,
        model_name: &str,
        timeout_secs: u64,
    ) -> Result<ExternalAdapterConfig, BackendError> {
        if endpoint.is_empty() || !endpoint.contains("://") {
            return Err(BackendError::InvalidConfig(format!(
                "endpoint {endpoint:?} is not a valid URL"
            )));
        }
        if model_name.is_empty() {
            return Err(BackendError::InvalidConfig("model_name must be non-empty".into()));
        }
        Ok(ExternalAdapterConfig {
            endpoint: endpoint.to_string(),
            model_name: model_name.to_string(),
            timeout_secs,
        })
    }
}

/// Stub backend carrying a validated configuration.
#[derive(Debug, Clone)]
pub struct ExternalAdapter {
    config: ExternalAdapterConfig,
}

impl ExternalAdapter {
    pub fn new(config: ExternalAdapterConfig) -> ExternalAdapter {
        ExternalAdapter { config }
    }

    pub fn config(&self) -> &ExternalAdapterConfig {
        &self.config
    }

    fn stub_error(&self, role: &str) -> BackendError {
        BackendError::NotImplemented(format!(
            "external adapter ({} via {}) has no network implementation; {role} unavailable",
            self.config.model_name, self.config.endpoint
        ))
    }
}

impl AgentBackend for ExternalAdapter {
    fn attack(&mut self, _spec: &AttackSpec) -> Result<AttackPayload, BackendError> {
        Err(self.stub_error("attack"))
    }

    fn defend(
        &mut self,
        _scenario: &Scenario,
        _ctx: &DefenseContext<'_>,
    ) -> Result<DefenseResponse, BackendError> {
        Err(self.stub_error("defend"))
    }

    fn evaluate(
        &mut self,
        _scenario: &Scenario,
        _defense: &DefenseResponse,
    ) -> Result<Evaluation, BackendError> {
        Err(self.stub_error("evaluate"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_config_still_refuses_role_calls() {
        let config =
            ExternalAdapterConfig::new("https://inference.example/v1", "demo-model", 30).unwrap();
        let mut adapter = ExternalAdapter::new(config);
        let scenario = crate::scenario::corpus::benign_assessment();
        let profile = crate::fixtures::seed_profile();
        let ctx = DefenseContext { profile: &profile, axioms: &[] };
        assert!(matches!(
            adapter.defend(&scenario, &ctx),
            Err(BackendError::NotImplemented(_))
        ));
        assert!(matches!(
            adapter.attack(&AttackSpec {
                dimension: crate::taxonomy::DimensionId::S1,
                session_index: 1
            }),
            Err(BackendError::NotImplemented(_))
        ));
    }

    #[test]
    fn empty_endpoint_is_a_configuration_error() {
        assert!(matches!(
            ExternalAdapterConfig::new("", "demo", 30),
            Err(BackendError::InvalidConfig(_))
        ));
        assert!(matches!(
            ExternalAdapterConfig::new("not-a-url", "demo", 30),
            Err(BackendError::InvalidConfig(_))
        ));
    }

    #[test]
    fn config_serialisation_round_trips() {
        let config =
            ExternalAdapterConfig::new("https://inference.example/v1", "demo-model", 30).unwrap();
        let json = serde_json::to_string(&config).unwrap();
        let back: ExternalAdapterConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(config, back);
    }
}
