//! Named experiment recipes, shipped as TOML so `list-experiments --show`
//! doubles as schema documentation.

use crate::error::{CliError, Result};
use crate::spec::ExperimentSpec;

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub toml: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "intro-spike",
        summary: "rational spike near x = 0.5, CauchyNet vs ReLU MLP, 200 train points, 500 epochs",
        toml: INTRO_SPIKE,
    },
    Preset {
        name: "exp1",
        summary: "sharp-peak target, 150 evenly spaced train points, 200 epochs, seed 10",
        toml: EXP1,
    },
    Preset {
        name: "exp2-gap",
        summary: "1D gap filling: +-0.15 intervals around the six turning points withheld",
        toml: EXP2_GAP,
    },
    Preset {
        name: "exp2-disk",
        summary: "2D imputation: disk of radius 0.3 around the origin withheld",
        toml: EXP2_DISK,
    },
    Preset {
        name: "exp3-surface",
        summary: "2D polynomial-rational surface, 300 random points, 500 epochs",
        toml: EXP3_SURFACE,
    },
    Preset {
        name: "exp4-csv",
        summary: "trend forecasting on a user CSV series (set data.csv.path and data.csv.column)",
        toml: EXP4_CSV,
    },
    Preset {
        name: "exp5-lambda",
        summary: "imaginary-penalty ablation over {0.1, 0.3, 0.5, 1, 1.5} on the exp1 data",
        toml: EXP5_LAMBDA,
    },
    Preset {
        name: "exp5-grid",
        summary: "hidden size x data size, and learning rate x weight decay sensitivity grids",
        toml: EXP5_GRID,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn preset_toml(name: &str) -> Result<&'static str> {
    find(name).map(|p| p.toml).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        CliError::config(format!("unknown preset '{name}'; known: {}", known.join(", ")))
    })
}

pub fn load(name: &str) -> Result<ExperimentSpec> {
    let spec = ExperimentSpec::from_toml_str(preset_toml(name)?)?;
    spec.validate()?;
    Ok(spec)
}

const INTRO_SPIKE: &str = r#"version = 1
name = "intro-spike"
description = "sin(3x) + 4/((x-0.5)^2 + 0.01) on [-1, 1]"

[data]
target = "intro_spike"
samples = 400
sampling = "grid"
split = "shuffled"
fractions = [0.5, 0.25, 0.25]

[model]
hidden = 128
epsilon = 1e-8
init = { kind = "ellipse", a = 1.2, b = 0.1 }

[train]
epochs = 500
batch_size = 32
lr = 0.001
lr_decay_factor = 1.0
lr_decay_every = 100
weight_decay = 0.0
lambda = 0.1
seed = 0

[baseline]
hidden = 128
"#;

const EXP1: &str = r#"version = 1
name = "exp1"
description = "1/((x+0.6)^2+0.005) - 40 exp(-2(x+0.4)^2) + 50 sign(x)|sin(3x)+0.8|^1.5 sin(10x)"

[data]
target = "exp1"
samples = 300
sampling = "grid"
split = "interleaved"
fractions = [0.5, 0.25, 0.25]

[model]
hidden = 128
epsilon = 1e-8
init = { kind = "ellipse", a = 1.2, b = 0.1 }

[train]
epochs = 200
batch_size = 32
lr = 0.01
lr_decay_factor = 0.5
lr_decay_every = 100
weight_decay = 1e-4
lambda = 0.1
seed = 10

[baseline]
hidden = 128
"#;

const EXP2_GAP: &str = r#"version = 1
name = "exp2-gap"
description = "gap filling on [-2, 2]; raise train.epochs for longer runs (up to 10000)"

[data]
target = "exp2_gap"
samples = 380
sampling = "grid"
visible_train_fraction = 0.72
mask = { kind = "turning_points", half_width = 0.15, grid = 4000 }

[model]
hidden = 128
epsilon = 1e-8
init = { kind = "ellipse", a = 2.4, b = 0.5 }

[train]
epochs = 1000
batch_size = 32
lr = 0.01
lr_decay_factor = 0.5
lr_decay_every = 100
weight_decay = 1e-4
lambda = 0.1
seed = 10

[baseline]
hidden = 128
"#;

const EXP2_DISK: &str = r#"version = 1
name = "exp2-disk"
description = "3 - x^2 + xy - y^2 - 1/(5+(x-1)^2) on [-0.8, 0.8]^2 with the central disk withheld"

[data]
target = "disk2d"
samples = 3000
sampling = "uniform"
visible_train_fraction = 0.6
mask = { kind = "disk", center = [0.0, 0.0], radius = 0.3 }

[model]
hidden = 128
epsilon = 1e-8
init = { kind = "ellipse", a = 1.6, b = 0.4 }

[train]
epochs = 200
batch_size = 32
lr = 0.01
lr_decay_factor = 0.5
lr_decay_every = 100
weight_decay = 1e-4
lambda = 0.1
seed = 10
"#;

const EXP3_SURFACE: &str = r#"version = 1
name = "exp3-surface"
description = "x^2 - xy + 3y + y^2 + 1/(5+x^2) on [-1.5, 1.5]^2"

[data]
target = "surface2d"
samples = 300
sampling = "uniform"
split = "shuffled"
fractions = [0.5, 0.25, 0.25]

[model]
hidden = 128
epsilon = 1e-8
init = { kind = "ellipse", a = 4.5, b = 1.5 }

[train]
epochs = 500
batch_size = 32
lr = 0.01
lr_decay_factor = 0.5
lr_decay_every = 100
weight_decay = 0.0
lambda = 0.1
seed = 10

[baseline]
hidden = 128
"#;

const EXP4_CSV: &str = r#"version = 1
name = "exp4-csv"
description = "multiplicative decomposition, then the trend on a [-1, 1] time axis; last quarter held out"

[data]
csv = { path = "series.csv", column = "value", period = 12 }
split = "chronological"
fractions = [0.5, 0.25, 0.25]
scaler_range = [-1.0, 1.0]

[model]
hidden = 128
epsilon = 1e-8
init = { kind = "ellipse", a = 1.2, b = 0.1 }

[train]
epochs = 200
batch_size = 32
lr = 0.01
lr_decay_factor = 0.5
lr_decay_every = 100
weight_decay = 1e-4
lambda = 0.1
seed = 10

[baseline]
hidden = 128
"#;

const EXP5_LAMBDA: &str = r#"version = 1
name = "exp5-lambda"
description = "test MSE per epoch for each imaginary-penalty weight, shared seed"

[data]
target = "exp1"
samples = 300
sampling = "grid"
split = "interleaved"
fractions = [0.5, 0.25, 0.25]

[model]
hidden = 128
epsilon = 1e-8
init = { kind = "ellipse", a = 1.2, b = 0.1 }

[train]
epochs = 200
batch_size = 32
lr = 0.01
lr_decay_factor = 0.5
lr_decay_every = 100
weight_decay = 1e-4
lambda = 0.1
seed = 10

[ablation]
lambdas = [0.1, 0.3, 0.5, 1.0, 1.5]
every = 1
"#;

const EXP5_GRID: &str = r#"version = 1
name = "exp5-grid"
description = "final test MSE over two sensitivity grids on the exp1 target"

[data]
target = "exp1"
samples = 300
sampling = "grid"
split = "interleaved"
fractions = [0.5, 0.25, 0.25]

[model]
hidden = 128
epsilon = 1e-8
init = { kind = "ellipse", a = 1.2, b = 0.1 }

[train]
epochs = 200
batch_size = 32
lr = 0.01
lr_decay_factor = 0.5
lr_decay_every = 100
weight_decay = 1e-4
lambda = 0.1
seed = 10

[[sweep]]
hidden = [32, 64, 128, 256, 612, 1224]
sizes = [100, 300, 600, 1200]

[[sweep]]
lrs = [0.001, 0.01, 0.1]
wds = [0.0, 1e-5, 1e-4]
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for p in PRESETS {
            let s = load(p.name).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(s.name, p.name);
        }
        assert!(load("nope").is_err());
    }

    #[test]
    fn grid_shapes() {
        let s = load("exp5-grid").unwrap();
        let a = &s.sweep[0];
        assert_eq!(a.hidden.as_ref().unwrap().len() * a.sizes.as_ref().unwrap().len(), 24);
        let b = &s.sweep[1];
        assert_eq!(b.lrs.as_ref().unwrap().len() * b.wds.as_ref().unwrap().len(), 9);
    }
}
