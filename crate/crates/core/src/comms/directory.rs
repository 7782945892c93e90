use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ToolError, ToolResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityType {
    Club,
    Advisor,
}

impl std::str::FromStr for EntityType {
    type Err = ToolError;

    fn from_str(s: &str) -> Result<Self, ToolError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "club" => Ok(EntityType::Club),
            "advisor" => Ok(EntityType::Advisor),
            other => Err(ToolError::Usage(format!("entity_type must be 'club' or 'advisor', got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectoryEntity {
    pub entity_type: EntityType,
    pub id: String,
    pub name: String,
    pub category: String,
    pub email: String,
    /// Free-form profile fields such as research areas or interest tags.
    #[serde(default)]
    pub profile: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Directory {
    #[serde(default)]
    pub categories: Vec<String>,
    #[serde(default)]
    pub entities: Vec<DirectoryEntity>,
}

impl Directory {
    pub fn list_by_category(&self, category: &str, entity_type: EntityType) -> Vec<&DirectoryEntity> {
        let mut out: Vec<&DirectoryEntity> = self
            .entities
            .iter()
            .filter(|e| e.entity_type == entity_type && e.category.trim().eq_ignore_ascii_case(category.trim()))
            .collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    pub fn query_by_identifier(&self, identifier: &str, by: &str, entity_type: EntityType) -> ToolResult<&DirectoryEntity> {
        let key = identifier.trim();
        let hit = match by.trim().to_ascii_lowercase().as_str() {
            "id" => self.entities.iter().find(|e| e.entity_type == entity_type && e.id == key),
            "name" => self
                .entities
                .iter()
                .find(|e| e.entity_type == entity_type && e.name.trim().eq_ignore_ascii_case(key)),
            other => return Err(ToolError::Usage(format!("`by` must be 'name' or 'id', got `{other}`"))),
        };
        hit.ok_or_else(|| ToolError::NotFound(format!("no {entity_type:?} matching `{key}`").to_lowercase()))
    }

    pub fn get(&self, id: &str) -> Option<&DirectoryEntity> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn of_type(&self, t: EntityType) -> impl Iterator<Item = &DirectoryEntity> {
        self.entities.iter().filter(move |e| e.entity_type == t)
    }

    pub fn validate(&self) -> Result<(), String> {
        let mut seen = std::collections::BTreeSet::new();
        for (i, e) in self.entities.iter().enumerate() {
            if !seen.insert((e.entity_type, e.id.as_str())) {
                return Err(format!("directory.entities[{i}]: duplicate id {}", e.id));
            }
            if !self.categories.is_empty() && !self.categories.iter().any(|c| c == &e.category) {
                return Err(format!("directory.entities[{i}]: unknown category `{}`", e.category));
            }
        }
        Ok(())
    }
}
