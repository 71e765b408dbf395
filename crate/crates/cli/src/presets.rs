//! Bundled scenario files, compiled into the binary.

pub const PRESETS: &[(&str, &str)] = &[
    ("fig3b.star", include_str!("../presets/fig3b.star.toml")),
    (
        "fig3c.conventional",
        include_str!("../presets/fig3c.conventional.toml"),
    ),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5.star", include_str!("../presets/fig5.star.toml")),
    ("fig5.conv", include_str!("../presets/fig5.conv.toml")),
    ("desk.m1", include_str!("../presets/desk.m1.toml")),
    ("desk.m2", include_str!("../presets/desk.m2.toml")),
];

pub fn lookup(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(preset, _)| *preset == name)
        .map(|(_, text)| *text)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(name, _)| *name).collect()
}
