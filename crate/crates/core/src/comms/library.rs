use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{ToolError, ToolResult};
use crate::map::BuildingId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryBook {
    pub title: String,
    pub author: String,
    pub category: String,
    pub status: String,
    pub call_number: String,
    pub location: BuildingId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LibraryCatalog {
    pub books: Vec<LibraryBook>,
}

impl LibraryCatalog {
    pub fn search(&self, query: &str, search_type: &str) -> ToolResult<Vec<&LibraryBook>> {
        let q = query.trim().to_lowercase();
        let by_author = match search_type.trim().to_ascii_lowercase().as_str() {
            "title" => false,
            "author" => true,
            other => return Err(ToolError::Usage(format!("search_type must be 'title' or 'author', got `{other}`"))),
        };
        Ok(self
            .books
            .iter()
            .filter(|b| if by_author { &b.author } else { &b.title }.to_lowercase().contains(&q))
            .collect())
    }

    pub fn list_by_category(&self, category: &str) -> Vec<&LibraryBook> {
        self.books
            .iter()
            .filter(|b| b.category.trim().eq_ignore_ascii_case(category.trim()))
            .collect()
    }

    /// Enforces unique (title, call number) and one building per category.
    pub fn validate(&self) -> Result<(), String> {
        let mut keys = BTreeSet::new();
        let mut homes: BTreeMap<&str, &BuildingId> = BTreeMap::new();
        for (i, b) in self.books.iter().enumerate() {
            if !keys.insert((b.title.as_str(), b.call_number.as_str())) {
                return Err(format!("library_books[{i}]: duplicate `{}` / {}", b.title, b.call_number));
            }
            match homes.get(b.category.as_str()) {
                Some(home) if *home != &b.location => {
                    return Err(format!(
                        "library_books[{i}]: category `{}` spread over {} and {}",
                        b.category, home, b.location
                    ));
                }
                _ => {
                    homes.insert(&b.category, &b.location);
                }
            }
        }
        Ok(())
    }
}
