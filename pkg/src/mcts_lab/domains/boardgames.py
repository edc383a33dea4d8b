"""Two-player zero-sum board games: TicTacToe and Connect4.

Player 0 moves first.  The move that ends the game carries the whole result
(+1 if player 0 wins, -1 if player 1 wins, 0 for a draw); every other move
has reward 0.  Legal actions are the empty cells (TicTacToe) or non-full
columns (Connect4) in increasing order.
"""
from __future__ import annotations

from ..mdp import Domain, EnvState, MdpDescriptor

_TTT_LINES = (
    (0, 1, 2), (3, 4, 5), (6, 7, 8),
    (0, 3, 6), (1, 4, 7), (2, 5, 8),
    (0, 4, 8), (2, 4, 6),
)


class _BoardGame(Domain):
    """Shared plumbing: payload is the board (0 empty, 1/2 for players 0/1) plus the mover."""

    cells: int

    def make_state(self, board: bytes, player: int) -> EnvState:
        done = self.winner(board) is not None or all(board[i] for i in range(self.cells))
        return EnvState(board + bytes((player,)), player, done)

    def board(self, state: EnvState) -> bytes:
        return state.payload[: self.cells]

    def initial_state(self):
        return self.make_state(bytes(self.cells), 0)

    def moves(self, board: bytes) -> list[int]:
        raise NotImplementedError

    def place(self, board: bytes, move: int, piece: int) -> bytes:
        raise NotImplementedError

    def winner(self, board: bytes) -> int | None:
        raise NotImplementedError

    def legal_actions(self, state):
        return [] if state.is_terminal else list(range(len(self.moves(self.board(state)))))

    def action_label(self, state, action):
        return self.moves(self.board(state))[action]

    def _apply(self, state: EnvState, action: int) -> bytes:
        board = self.board(state)
        return self.place(board, self.moves(board)[action], state.player_to_move + 1)

    def _transitions(self, state, action):
        return [(self.make_state(self._apply(state, action), 1 - state.player_to_move), 1.0)]

    def reward(self, state, action):
        self.check_action(state, action)
        w = self.winner(self._apply(state, action))
        if w is None:
            return 0.0
        return 1.0 if w == 0 else -1.0


class TicTacToe(_BoardGame):
    cells = 9

    def __init__(self, horizon: int = 100, name: str = "tictactoe"):
        self.descriptor = MdpDescriptor(name, horizon, num_players=2)

    def moves(self, board):
        return [i for i in range(9) if not board[i]]

    def place(self, board, move, piece):
        b = bytearray(board)
        b[move] = piece
        return bytes(b)

    def winner(self, board):
        for a, b, c in _TTT_LINES:
            if board[a] and board[a] == board[b] == board[c]:
                return board[a] - 1
        return None


class Connect4(_BoardGame):
    rows, cols = 6, 7
    cells = 42

    def __init__(self, horizon: int = 100, name: str = "connect4"):
        self.descriptor = MdpDescriptor(name, horizon, num_players=2)

    # cell index = row * cols + col, row 0 at the bottom
    def moves(self, board):
        top = (self.rows - 1) * self.cols
        return [c for c in range(self.cols) if not board[top + c]]

    def place(self, board, move, piece):
        b = bytearray(board)
        for r in range(self.rows):
            if not b[r * self.cols + move]:
                b[r * self.cols + move] = piece
                break
        return bytes(b)

    def winner(self, board):
        R, C = self.rows, self.cols
        for r in range(R):
            for c in range(C):
                p = board[r * C + c]
                if not p:
                    continue
                for dr, dc in ((0, 1), (1, 0), (1, 1), (1, -1)):
                    rr, cc = r + 3 * dr, c + 3 * dc
                    if 0 <= rr < R and 0 <= cc < C and all(
                        board[(r + k * dr) * C + c + k * dc] == p for k in range(1, 4)
                    ):
                        return p - 1
        return None
