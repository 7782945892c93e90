//! System prompts selectable by name.

pub const PRESET_NAMES: [&str; 4] = ["vanilla", "proactive", "skill", "all_in_one"];

pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "vanilla" => Some(include_str!("../../assets/presets/vanilla.txt")),
        "proactive" => Some(include_str!("../../assets/presets/proactive.txt")),
        "skill" => Some(include_str!("../../assets/presets/skill.txt")),
        "all_in_one" => Some(include_str!("../../assets/presets/all_in_one.txt")),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        for n in PRESET_NAMES {
            assert!(!preset(n).unwrap().trim().is_empty());
        }
        assert!(preset("chaotic").is_none());
    }
}
