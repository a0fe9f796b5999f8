use std::collections::BTreeMap;
use std::fmt;

use crate::symcore::{Expr, Symbol};

use super::error::GeometryError;

/// Where a vector field lives. Components are always expressions; the role fixes
/// which directions and which coordinates they may involve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    /// On `E`: directions `d/dx`, `d/dq`.
    OnE,
    /// On `J^1`: directions `d/dx`, `d/dq`, `d/dv`.
    OnJ1,
    /// Along `pi_{1,0}`: directions `d/dx`, `d/dq`, components on `J^1`.
    AlongPi10,
    /// Along `pi_{2,1}`: directions `d/dx`, `d/dq`, `d/dv`, components on `J^2`.
    AlongPi21,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::OnE => "on-E",
            Role::OnJ1 => "on-J1",
            Role::AlongPi10 => "along-pi10",
            Role::AlongPi21 => "along-pi21",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        [Role::OnE, Role::OnJ1, Role::AlongPi10, Role::AlongPi21].into_iter().find(|r| r.as_str() == s)
    }

    fn allows_velocity_directions(self) -> bool {
        matches!(self, Role::OnJ1 | Role::AlongPi21)
    }

    fn allows_second_jet(self) -> bool {
        self == Role::AlongPi21
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VectorField {
    role: Role,
    components: BTreeMap<Symbol, Expr>,
}

impl VectorField {
    pub fn new(role: Role, components: BTreeMap<Symbol, Expr>) -> Result<Self, GeometryError> {
        let mut kept = BTreeMap::new();
        for (s, c) in components {
            if s.is_param() || s.is_second_jet() {
                return Err(GeometryError::InvalidField(format!("no direction d/d{s}")));
            }
            if s.is_first_jet() && !role.allows_velocity_directions() {
                return Err(GeometryError::InvalidField(format!("a field {role} has no d/d{s} direction")));
            }
            if c.has_second_jet() && !role.allows_second_jet() {
                return Err(GeometryError::InvalidField(format!(
                    "component d/d{s} = `{c}` uses second-jet coordinates, not allowed {role}"
                )));
            }
            if !c.is_zero() {
                kept.insert(s, c);
            }
        }
        Ok(VectorField { role, components: kept })
    }

    pub fn zero(role: Role) -> Self {
        VectorField { role, components: BTreeMap::new() }
    }

    /// The coordinate field `d/ds`.
    pub fn coordinate(role: Role, s: Symbol) -> Self {
        VectorField::new(role, [(s, Expr::one())].into_iter().collect()).expect("valid coordinate direction")
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn components(&self) -> &BTreeMap<Symbol, Expr> {
        &self.components
    }

    pub fn component(&self, s: &Symbol) -> Expr {
        self.components.get(s).cloned().unwrap_or_else(Expr::zero)
    }

    /// `X_alpha = dx^alpha(X)`.
    pub fn x_component(&self, alpha: usize) -> Expr {
        self.component(&Symbol::x(alpha))
    }

    /// `X^i = dq^i(X)`.
    pub fn q_component(&self, i: usize) -> Expr {
        self.component(&Symbol::q(i))
    }

    pub fn v_component(&self, i: usize, alpha: usize) -> Expr {
        self.component(&Symbol::v(i, alpha))
    }

    /// No `d/dx` components.
    pub fn is_vertical(&self) -> bool {
        self.components.keys().all(|s| !s.is_independent())
    }

    /// A field on `E` whose components depend on first-jet coordinates. Such a
    /// field is really a field along `pi_{1,0}`; it is accepted but reported.
    pub fn is_velocity_dependent(&self) -> bool {
        self.components.values().any(Expr::has_first_jet)
    }

    /// Same components with a different role, revalidated.
    pub fn with_role(&self, role: Role) -> Result<Self, GeometryError> {
        VectorField::new(role, self.components.clone())
    }

    /// `X(f) = sum_s X^s df/ds`.
    pub fn apply(&self, f: &Expr) -> Result<Expr, GeometryError> {
        let mut parts = Vec::with_capacity(self.components.len());
        for (s, c) in &self.components {
            if f.depends_on(s) {
                parts.push(c * &f.diff(s)?);
            }
        }
        Ok(Expr::sum(parts))
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField, GeometryError> {
        if self.role != other.role {
            return Err(GeometryError::RoleMismatch { expected: format!("a field {}", self.role), found: other.role });
        }
        let mut comps = self.components.clone();
        for (s, c) in &other.components {
            let slot = comps.entry(s.clone()).or_insert_with(Expr::zero);
            *slot = &*slot + c;
        }
        VectorField::new(self.role, comps)
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        let comps = self.components.iter().map(|(s, c)| (s.clone(), c * f)).collect();
        VectorField::new(self.role, comps).unwrap_or_else(|_| VectorField::zero(self.role))
    }

    /// Lie bracket `[X, Y]` of two fields on `J^1`.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField, GeometryError> {
        for f in [self, other] {
            if f.role != Role::OnJ1 {
                return Err(GeometryError::RoleMismatch { expected: "a field on J1".into(), found: f.role });
            }
        }
        let mut dirs: Vec<Symbol> = self.components.keys().cloned().collect();
        dirs.extend(other.components.keys().cloned());
        dirs.sort();
        dirs.dedup();
        let mut comps = BTreeMap::new();
        for s in dirs {
            let c = self.apply(&other.component(&s))? - other.apply(&self.component(&s))?;
            comps.insert(s, c);
        }
        VectorField::new(Role::OnJ1, comps)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return f.write_str("0");
        }
        for (i, (s, c)) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})*d/d{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField[{}]({self})", self.role)
    }
}
