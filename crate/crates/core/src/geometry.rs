//! Axis-aligned boxes with one boundary label per face.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Plate,
    Absorbing,
    Dirichlet,
    Neumann,
}

impl Label {
    /// Plate, absorbing and Neumann faces all carry homogeneous Neumann
    /// conditions for the eigenfamilies.
    pub fn is_dirichlet(self) -> bool {
        self == Label::Dirichlet
    }
}

/// A face is identified by its normal axis and whether it sits at the upper end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Face {
    pub axis: usize,
    pub high: bool,
}

impl Face {
    pub fn new(axis: usize, high: bool) -> Self {
        Face { axis, high }
    }

    /// Outward normal sign along `axis`.
    pub fn normal_sign(self) -> f64 {
        if self.high {
            1.0
        } else {
            -1.0
        }
    }

    pub fn name(self) -> String {
        let axis = ["x", "y", "z"][self.axis];
        format!("{}{}", axis, if self.high { "1" } else { "0" })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxGeometry {
    sides: Vec<f64>,
    /// labels[axis] = [low face, high face]
    labels: Vec<[Label; 2]>,
}

impl BoxGeometry {
    pub fn new(sides: Vec<f64>, labels: Vec<[Label; 2]>) -> Result<Self> {
        let dim = sides.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::constraint(
                "/geometry/sides",
                format!("dimension must be 2 or 3, got {dim}"),
            ));
        }
        if labels.len() != dim {
            return Err(Error::constraint(
                "/geometry/faces",
                "one label pair per axis required",
            ));
        }
        for (a, &l) in sides.iter().enumerate() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::constraint(
                    &format!("/geometry/sides/{a}"),
                    "side lengths must be positive",
                ));
            }
        }
        let plates = labels.iter().flatten().filter(|&&l| l == Label::Plate).count();
        if plates != 1 {
            return Err(Error::constraint(
                "/geometry/faces",
                format!("exactly one plate face required, found {plates}"),
            ));
        }
        let g = BoxGeometry { sides, labels };
        if g.has(Label::Dirichlet) && g.has(Label::Absorbing) {
            return Err(Error::constraint(
                "/geometry/faces",
                "Dirichlet and absorbing faces cannot coexist (existence theory requires an empty absorbing part when a Dirichlet part is present)",
            ));
        }
        Ok(g)
    }

    /// Unit square (or cube) with the reference labelling: plate at the bottom,
    /// Dirichlet on top, Neumann elsewhere.
    pub fn reference(dim: usize) -> Self {
        let mut labels = vec![[Label::Neumann, Label::Neumann]; dim];
        labels[1] = [Label::Plate, Label::Dirichlet];
        BoxGeometry::new(vec![1.0; dim], labels).expect("reference geometry is valid")
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.sides[axis]
    }

    pub fn label(&self, face: Face) -> Label {
        self.labels[face.axis][face.high as usize]
    }

    pub fn labels(&self, axis: usize) -> [Label; 2] {
        self.labels[axis]
    }

    pub fn faces(&self) -> impl Iterator<Item = Face> + '_ {
        (0..self.dim()).flat_map(|a| [Face::new(a, false), Face::new(a, true)])
    }

    pub fn faces_with(&self, label: Label) -> Vec<Face> {
        self.faces().filter(|&f| self.label(f) == label).collect()
    }

    pub fn has(&self, label: Label) -> bool {
        self.faces().any(|f| self.label(f) == label)
    }

    pub fn plate_face(&self) -> Face {
        self.faces_with(Label::Plate)[0]
    }

    /// Axes tangential to `face`, in increasing order.
    pub fn tangential_axes(&self, face: Face) -> Vec<usize> {
        (0..self.dim()).filter(|&a| a != face.axis).collect()
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }

    pub fn face_area(&self, face: Face) -> f64 {
        self.tangential_axes(face).iter().map(|&a| self.sides[a]).product()
    }
}
