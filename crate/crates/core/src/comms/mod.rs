//! Messaging and read-only information stores.

pub mod bibliography;
pub mod directory;
pub mod email;
pub mod library;

pub use bibliography::{BibLevel, BibNode, Bibliography};
pub use directory::{Directory, DirectoryEntity, EntityType};
pub use email::{normalize_email_text, EmailLog, EmailRecord, EmailSpec};
pub use library::{LibraryBook, LibraryCatalog};
