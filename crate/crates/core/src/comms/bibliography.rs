use serde::{Deserialize, Serialize};

use crate::error::{ToolError, ToolResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BibLevel {
    Book,
    Chapter,
    Section,
    Article,
}

impl BibLevel {
    pub fn child(self) -> Option<BibLevel> {
        match self {
            BibLevel::Book => Some(BibLevel::Chapter),
            BibLevel::Chapter => Some(BibLevel::Section),
            BibLevel::Section => Some(BibLevel::Article),
            BibLevel::Article => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BibLevel::Book => "book",
            BibLevel::Chapter => "chapter",
            BibLevel::Section => "section",
            BibLevel::Article => "article",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibNode {
    pub level: BibLevel,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<BibNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<String>,
}

fn norm(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Title match that also accepts a chapter title without its `Chapter N:` label.
fn title_matches(title: &str, query: &str) -> bool {
    let (t, q) = (norm(title), norm(query));
    if t == q {
        return true;
    }
    t.split_once(": ").is_some_and(|(label, rest)| label.starts_with("chapter ") && rest == q)
}

impl BibNode {
    fn child(&self, query: &str) -> ToolResult<&BibNode> {
        let level = self.level.child().map_or("entry", BibLevel::name);
        self.children
            .iter()
            .find(|c| title_matches(&c.title, query))
            .ok_or_else(|| ToolError::NotFound(format!("no {level} `{}` in {} `{}`", query.trim(), self.level.name(), self.title)))
    }

    /// Checks strict level nesting, content placement and sibling uniqueness.
    pub fn validate(&self, path: &str) -> Result<(), String> {
        match (self.level, &self.content) {
            (BibLevel::Article, None) => return Err(format!("{path}: article without content")),
            (BibLevel::Article, Some(_)) if !self.children.is_empty() => {
                return Err(format!("{path}: article with children"))
            }
            (l, Some(_)) if l != BibLevel::Article => return Err(format!("{path}: content above article level")),
            _ => {}
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, c) in self.children.iter().enumerate() {
            let p = format!("{path}.children[{i}]");
            if Some(c.level) != self.level.child() {
                return Err(format!("{p}: {} nested under {}", c.level.name(), self.level.name()));
            }
            if !seen.insert(norm(&c.title)) {
                return Err(format!("{p}: duplicate title `{}`", c.title));
            }
            c.validate(&p)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bibliography {
    #[serde(default)]
    pub books: Vec<BibNode>,
}

impl Bibliography {
    fn book(&self, title: &str) -> ToolResult<&BibNode> {
        self.books
            .iter()
            .find(|b| title_matches(&b.title, title))
            .ok_or_else(|| ToolError::NotFound(format!("no book `{}`", title.trim())))
    }

    pub fn list_chapters(&self, book: &str) -> ToolResult<Vec<&str>> {
        Ok(self.book(book)?.children.iter().map(|c| c.title.as_str()).collect())
    }

    pub fn list_sections(&self, book: &str, chapter: &str) -> ToolResult<Vec<&str>> {
        Ok(self.book(book)?.child(chapter)?.children.iter().map(|c| c.title.as_str()).collect())
    }

    pub fn list_articles(&self, book: &str, chapter: &str, section: &str) -> ToolResult<Vec<&BibNode>> {
        Ok(self.book(book)?.child(chapter)?.child(section)?.children.iter().collect())
    }

    /// Finds an article anywhere by title or id.
    pub fn view_article(&self, identifier: &str, search_type: &str) -> ToolResult<&BibNode> {
        let by_id = match search_type.trim().to_ascii_lowercase().as_str() {
            "title" => false,
            "id" => true,
            other => return Err(ToolError::Usage(format!("search_type must be 'title' or 'id', got `{other}`"))),
        };
        let mut stack: Vec<&BibNode> = self.books.iter().rev().collect();
        while let Some(n) = stack.pop() {
            if n.level == BibLevel::Article {
                let hit = if by_id {
                    n.id.as_deref().is_some_and(|i| i.trim() == identifier.trim())
                } else {
                    title_matches(&n.title, identifier)
                };
                if hit {
                    return Ok(n);
                }
            }
            stack.extend(n.children.iter().rev());
        }
        Err(ToolError::NotFound(format!("no article with {} `{}`", if by_id { "id" } else { "title" }, identifier.trim())))
    }

    pub fn validate(&self) -> Result<(), String> {
        for (i, b) in self.books.iter().enumerate() {
            if b.level != BibLevel::Book {
                return Err(format!("bibliography.books[{i}]: top level must be a book"));
            }
            b.validate(&format!("bibliography.books[{i}]"))?;
        }
        Ok(())
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn listings() {
        let b = sample();
        assert_eq!(b.list_chapters("Student Handbook").unwrap(), ["Academic Integrity"]);
        assert_eq!(b.list_sections("A Panorama of Computing", "Chapter 1: Search").unwrap(), ["Uninformed Search"]);
        let arts = b.list_articles("A Panorama of Computing", "Search", "Uninformed Search").unwrap();
        assert_eq!(arts[0].title, "Breadth-First Search");
    }

    #[test]
    fn wrong_chapter_reports_level() {
        let b = sample();
        match b.list_sections("A Panorama of Computing", "Chapter 9") {
            Err(ToolError::NotFound(msg)) => assert!(msg.contains("chapter")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn view_by_title_and_id() {
        let b = sample();
        assert_eq!(b.view_article("Breadth-First Search", "title").unwrap().content.as_deref(), Some("BFS explores level by level."));
        assert_eq!(b.view_article("A-001", "id").unwrap().title, "Breadth-First Search");
        assert!(b.view_article("A-001", "title").is_err());
        assert!(matches!(b.view_article("x", "isbn"), Err(ToolError::Usage(_))));
    }

    #[test]
    fn validation_rejects_bad_nesting() {
        let mut b = sample();
        assert!(b.validate().is_ok());
        b.books[1].children.push(article("Loose", "X", "y"));
        assert!(b.validate().is_err());
    }
}
