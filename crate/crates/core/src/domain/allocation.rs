use std::fmt;

/// Binary task-by-robot assignment matrix; cell `(m, n)` is set when robot
/// `n` works on task `m`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation {
    tasks: usize,
    robots: usize,
    cells: Vec<bool>,
}

impl Allocation {
    pub fn zeros(tasks: usize, robots: usize) -> Self {
        Self {
            tasks,
            robots,
            cells: vec![false; tasks * robots],
        }
    }

    /// Builds from 0/1 rows; any non-zero entry counts as an assignment.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let robots = rows.first().map_or(0, |r| r.as_ref().len());
        let mut out = Self::zeros(rows.len(), robots);
        for (m, row) in rows.iter().enumerate() {
            assert_eq!(row.as_ref().len(), robots, "ragged allocation rows");
            for (n, &v) in row.as_ref().iter().enumerate() {
                out.set(m, n, v != 0);
            }
        }
        out
    }

    pub fn tasks(&self) -> usize {
        self.tasks
    }

    pub fn robots(&self) -> usize {
        self.robots
    }

    pub fn get(&self, task: usize, robot: usize) -> bool {
        self.cells[task * self.robots + robot]
    }

    pub fn set(&mut self, task: usize, robot: usize, value: bool) {
        self.cells[task * self.robots + robot] = value;
    }

    /// Copy with one more assignment.
    pub fn with(&self, task: usize, robot: usize) -> Self {
        let mut out = self.clone();
        out.set(task, robot, true);
        out
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn robots_of(&self, task: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.robots).filter(move |&n| self.get(task, n))
    }

    pub fn tasks_of(&self, robot: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.tasks).filter(move |&m| self.get(m, robot))
    }

    pub fn robot_is_used(&self, robot: usize) -> bool {
        self.tasks_of(robot).next().is_some()
    }

    pub fn task_is_staffed(&self, task: usize) -> bool {
        self.robots_of(task).next().is_some()
    }

    /// Robots assigned to both tasks.
    pub fn shared_robots(&self, a: usize, b: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.robots).filter(move |&n| self.get(a, n) && self.get(b, n))
    }

    pub fn remove_robot(&mut self, robot: usize) {
        let robots = self.robots;
        self.cells = self
            .cells
            .iter()
            .enumerate()
            .filter(|(i, _)| i % robots != robot)
            .map(|(_, &c)| c)
            .collect();
        self.robots -= 1;
    }

    pub fn remove_task(&mut self, task: usize) {
        self.cells
            .drain(task * self.robots..(task + 1) * self.robots);
        self.tasks -= 1;
    }

    pub fn push_robot(&mut self) {
        let mut cells = Vec::with_capacity(self.tasks * (self.robots + 1));
        for row in self.cells.chunks(self.robots.max(1)).take(self.tasks) {
            cells.extend_from_slice(&row[..self.robots]);
            cells.push(false);
        }
        if self.robots == 0 {
            cells = vec![false; self.tasks];
        }
        self.cells = cells;
        self.robots += 1;
    }

    pub fn push_task(&mut self) {
        self.cells
            .extend(std::iter::repeat(false).take(self.robots));
        self.tasks += 1;
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.tasks)
            .map(|m| (0..self.robots).map(|n| self.get(m, n) as u8).collect())
            .collect()
    }
}

impl fmt::Debug for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Allocation{:?}", self.to_rows())
    }
}
