import pytest

from utils.abc_end_view import AbcPuzzle, AbcSolution
from utils.goishi_hiroi import GoishiPuzzle, GoishiSolution

ABC5_TEXT = """\
abc 5 3
top: B C . . .
bottom: . . . A A
left: . A . B .
right: . C . . B
solution:
B . A C .
A . . B C
. C . A B
. B C . A
C A B . .
"""

GOISHI6_TEXT = """\
goishi 6
o.....
...o.o
...ooo
.o....
oo...o
o....o
picks: 3,1 4,1 4,5 2,5 2,4 2,3 1,3 1,5 5,5 5,0 4,0 0,0
"""

GOISHI6_PICKS = [
    (3, 1), (4, 1), (4, 5), (2, 5), (2, 4), (2, 3),
    (1, 3), (1, 5), (5, 5), (5, 0), (4, 0), (0, 0),
]


@pytest.fixture
def abc5_puzzle():
    return AbcPuzzle(
        n=5,
        k=3,
        top=(2, 3, None, None, None),
        bottom=(None, None, None, 1, 1),
        left=(None, 1, None, 2, None),
        right=(None, 3, None, None, 2),
    )


@pytest.fixture
def abc5_solution():
    return AbcSolution.from_rows([
        [2, 0, 1, 3, 0],
        [1, 0, 0, 2, 3],
        [0, 3, 0, 1, 2],
        [0, 2, 3, 0, 1],
        [3, 1, 2, 0, 0],
    ])


@pytest.fixture
def goishi6_puzzle():
    return GoishiPuzzle.from_cells(6, GOISHI6_PICKS)


@pytest.fixture
def goishi6_solution():
    return GoishiSolution.from_cells(GOISHI6_PICKS)


@pytest.fixture
def line_puzzle():
    """Three stones in the top row of a 3x3 grid."""
    return GoishiPuzzle.from_cells(3, [(0, 0), (0, 1), (0, 2)])


@pytest.fixture
def pair_puzzle():
    """Two neighbouring stones; both pick orders solve it."""
    return GoishiPuzzle.from_cells(2, [(0, 0), (0, 1)])


def snake_cells(n, m):
    """First m cells of a boustrophedon walk over an n x n grid."""
    cells = []
    for row in range(n):
        cols = range(n) if row % 2 == 0 else range(n - 1, -1, -1)
        cells.extend((row, col) for col in cols)
    return cells[:m]


@pytest.fixture
def abc5_file(tmp_path):
    path = tmp_path / "abc5.txt"
    path.write_text(ABC5_TEXT, encoding="utf-8")
    return path


@pytest.fixture
def goishi6_file(tmp_path):
    path = tmp_path / "goishi6.txt"
    path.write_text(GOISHI6_TEXT, encoding="utf-8")
    return path
