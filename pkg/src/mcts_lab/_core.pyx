# cython: language_level=3
# distutils: language = c++
"""Compiled search core.

A line-by-line mirror of ``search/engine.py`` and ``abstraction.py`` on flat
C++ arrays.  Random numbers come from the caller's numpy bit generator, in the
same order as the Python engine draws them, so both backends build identical
graphs.  Python is only entered to fetch model data the first time a
``(state, action)`` pair is needed.
"""
from libc.math cimport log, sqrt, INFINITY, isinf
from libcpp.vector cimport vector
from libcpp.unordered_map cimport unordered_map
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t

from .abstraction import conf_z
from .search.engine import NoVisitedChild
from .search.graph import GraphSnapshot

cdef enum:
    UCT = 0
    OGA = 1
    IPA = 2
    RSTATE = 3
    CONF = 4
    TOPN = 5

_VARIANT_CODES = {"UCT": UCT, "OGA": OGA, "IPA": IPA, "RSTATE": RSTATE, "CONF": CONF, "TOPN": TOPN}


cdef class CoreModel:
    """C arrays mirroring a ``ModelCache``; filled lazily, shared by all searches of an episode."""

    cdef object py
    cdef vector[int] nact
    cdef vector[int] tflag
    cdef vector[int] player
    cdef vector[int] ebase
    cdef vector[int] e_off
    cdef vector[int] e_n
    cdef vector[double] e_reward
    cdef vector[int] succ
    cdef vector[double] prob
    cdef vector[double] cum

    def __init__(self, model):
        self.py = model
        self.sync()

    cdef int sync(self) except -1:
        cdef int sid, n, k, flag
        py = self.py
        cdef int total = len(py.states)
        for sid in range(<int>self.nact.size(), total):
            n = py.nact[sid]
            self.nact.push_back(n)
            # typed temporary: Cython mistypes conditional expressions passed to push_back
            flag = 1 if py.terminal[sid] else 0
            self.tflag.push_back(flag)
            self.player.push_back(py.player[sid])
            self.ebase.push_back(<int>self.e_off.size())
            for k in range(n):
                self.e_off.push_back(-1)
                self.e_n.push_back(0)
                self.e_reward.push_back(0.0)
        return 0

    cdef int edge(self, int sid, int a) except -1:
        cdef int e = self.ebase[sid] + a
        cdef int i
        if self.e_off[e] >= 0:
            return e
        reward, succ, probs, cum = self.py.fetch(sid, a)
        self.sync()
        self.e_off[e] = <int>self.succ.size()
        self.e_n[e] = len(succ)
        self.e_reward[e] = reward
        for i in range(len(succ)):
            self.succ.push_back(succ[i])
            self.prob.push_back(probs[i])
            self.cum.push_back(cum[i])
        return e


def core_model(model):
    cm = getattr(model, "_core_model", None)
    if cm is None:
        cm = CoreModel(model)
        model._core_model = cm
    return cm


cdef inline int sample_index(const double* cum, int n, double u) noexcept:
    cdef int i
    for i in range(n):
        if u < cum[i]:
            return i
    return n - 1


cdef class CoreEngine:
    cdef CoreModel m
    cdef object py_model
    cdef object config
    cdef object rng
    cdef bitgen_t* bg
    cdef public int horizon
    cdef public long long iterations_done
    cdef int iterations

    # policy
    cdef int variant, K, lambda_inf, scaled, bypass, n_matches, n_min
    cdef double C, fallback, eps_a, eps_t, alpha, lambda_p, p_move, z, sigma

    # state nodes
    cdef vector[int] s_sid
    cdef vector[int] s_depth
    cdef vector[int] s_term
    cdef vector[int] s_player
    cdef vector[int] s_nact
    cdef vector[int] s_visits
    cdef vector[int] s_nsum
    cdef vector[int] s_group
    cdef vector[int] s_recency
    cdef vector[int] s_updated
    cdef vector[int] s_id
    cdef vector[vector[int]] s_children
    cdef vector[vector[int]] s_parents
    cdef vector[vector[int]] s_J

    # Q nodes
    cdef vector[int] q_parent
    cdef vector[int] q_action
    cdef vector[int] q_edge
    cdef vector[int] q_nlinked
    cdef vector[int] q_N
    cdef vector[int] q_group
    cdef vector[int] q_recency
    cdef vector[int] q_id
    cdef vector[double] q_V, q_V2
    cdef vector[vector[int]] q_succ

    # groups (index = creation id)
    cdef vector[int] g_kind
    cdef vector[int] g_depth
    cdef vector[int] g_N
    cdef vector[int] g_rep
    cdef vector[int] g_terminal
    cdef vector[int] g_alive
    cdef vector[double] g_V
    cdef vector[vector[int]] g_members
    cdef vector[vector[int]] sg_list
    cdef vector[vector[int]] qg_list
    cdef vector[int] term_group

    cdef unordered_map[long long, int] table
    cdef int next_node_id
    cdef long long q_count
    cdef double q_sum, q_sumsq

    # scratch
    cdef vector[int] path
    cdef vector[int] mass_key
    cdef vector[double] mass_val
    cdef vector[double] tmp_lo
    cdef vector[double] tmp_hi
    cdef vector[double] tmp_q

    backend = "compiled"

    def __init__(self, model, config, rng, int root_sid, int horizon):
        if horizon < 1 or model.terminal[root_sid]:
            raise ValueError("search needs a non-terminal root with horizon >= 1")
        self.py_model = model
        self.m = core_model(model)
        self.m.sync()
        self.config = config
        self.rng = rng
        self.bg = <bitgen_t*>PyCapsule_GetPointer(rng.bit_generator.capsule, "BitGenerator")
        self.horizon = horizon
        self.iterations = config.iterations
        self.iterations_done = 0
        pol = config.abstraction_policy
        self.variant = _VARIANT_CODES[pol.variant]
        self.K = config.recency_K
        self.C = config.exploration_C
        self.fallback = config.sigma_fallback
        self.eps_a = pol.eps_a
        self.eps_t = pol.eps_t
        self.alpha = pol.alpha
        self.lambda_p = pol.lambda_p
        self.lambda_inf = 1 if isinf(pol.lambda_p) else 0
        self.scaled = 1 if pol.lambda_p_scaled else 0
        self.bypass = 1 if pol.propagate_bypasses_recency else 0
        self.p_move = pol.p_move
        self.n_matches = pol.n_matches
        self.n_min = pol.n_min
        self.z = conf_z(pol.p_c) if self.variant == CONF else 0.0
        self.sigma = 1.0
        self.sg_list.resize(horizon + 1)
        self.qg_list.resize(horizon)
        self.term_group.assign(horizon + 1, -1)
        self.next_node_id = 0
        self.q_count = 0
        self.q_sum = 0.0
        self.q_sumsq = 0.0
        self.add_state(root_sid, 0)

    cdef inline double draw(self) noexcept:
        return self.bg.next_double(self.bg.state)

    # -- groups -----------------------------------------------------------------
    cdef int new_group(self, int kind, int depth, int terminal):
        cdef int g = <int>self.g_kind.size()
        self.g_kind.push_back(kind)
        self.g_depth.push_back(depth)
        self.g_N.push_back(0)
        self.g_V.push_back(0.0)
        self.g_rep.push_back(-1)
        self.g_terminal.push_back(terminal)
        self.g_alive.push_back(1)
        self.g_members.push_back(vector[int]())
        if kind == 0:
            self.sg_list[depth].push_back(g)
        else:
            self.qg_list[depth].push_back(g)
        return g

    cdef void drop_group(self, int g):
        cdef vector[int]* lst = &self.sg_list[self.g_depth[g]] if self.g_kind[g] == 0 else &self.qg_list[self.g_depth[g]]
        cdef size_t i
        for i in range(lst.size()):
            if lst[0][i] == g:
                lst.erase(lst.begin() + i)
                break
        self.g_alive[g] = 0

    # -- nodes -------------------------------------------------------------------
    cdef int add_state(self, int sid, int depth):
        cdef int s = <int>self.s_sid.size()
        cdef int term = 1 if (self.m.tflag[sid] or depth >= self.horizon) else 0
        cdef int g
        cdef int nact = 0 if term else self.m.nact[sid]
        self.s_sid.push_back(sid)
        self.s_depth.push_back(depth)
        self.s_term.push_back(term)
        self.s_player.push_back(self.m.player[sid])
        self.s_nact.push_back(nact)
        self.s_visits.push_back(0)
        self.s_nsum.push_back(0)
        self.s_recency.push_back(0)
        self.s_updated.push_back(0)
        self.s_id.push_back(self.next_node_id)
        self.next_node_id += 1
        self.s_children.push_back(vector[int]())
        self.s_parents.push_back(vector[int]())
        self.s_J.push_back(vector[int]())
        self.table[((<long long>depth) << 32) | sid] = s
        if term:
            g = self.term_group[depth]
            if g < 0:
                g = self.new_group(0, depth, 1)
                self.term_group[depth] = g
                self.g_rep[g] = s
        else:
            g = self.new_group(0, depth, 0)
            self.g_rep[g] = s
        self.g_members[g].push_back(s)
        self.s_group.push_back(g)
        return s

    cdef int add_q(self, int s) except -1:
        cdef int a = <int>self.s_children[s].size()
        cdef int e = self.m.edge(self.s_sid[s], a)
        cdef int q = <int>self.q_parent.size()
        cdef int g
        self.q_parent.push_back(s)
        self.q_action.push_back(a)
        self.q_edge.push_back(e)
        self.q_nlinked.push_back(0)
        self.q_N.push_back(0)
        self.q_V.push_back(0.0)
        self.q_V2.push_back(0.0)
        self.q_recency.push_back(0)
        self.q_id.push_back(self.next_node_id)
        self.next_node_id += 1
        self.q_succ.push_back(vector[int](self.m.e_n[e], -1))
        self.s_children[s].push_back(q)
        g = self.new_group(1, self.s_depth[s], 0)
        self.g_rep[g] = q
        self.g_members[g].push_back(q)
        self.q_group.push_back(g)
        return q

    cdef int link(self, int q, int i, int* is_new):
        cdef int depth = self.s_depth[self.q_parent[q]] + 1
        cdef int e = self.q_edge[q]
        cdef int sid = self.m.succ[self.m.e_off[e] + i]
        cdef long long key = ((<long long>depth) << 32) | sid
        cdef int node
        if self.table.count(key) == 0:
            node = self.add_state(sid, depth)
            is_new[0] = 1
        else:
            node = self.table[key]
            is_new[0] = 0
        self.q_succ[q][i] = node
        self.q_nlinked[q] += 1
        self.s_parents[node].push_back(q)
        return node

    cdef inline bint q_full(self, int q) noexcept:
        return self.q_nlinked[q] == <int>self.q_succ[q].size()

    cdef inline bint s_full(self, int s) noexcept:
        return (not self.s_term[s]) and <int>self.s_children[s].size() == self.s_nact[s]

    cdef double get_sigma(self):
        cdef long long n = self.q_count
        cdef double mean, var
        if n < 2:
            return self.fallback
        mean = self.q_sum / n
        var = self.q_sumsq / n - mean * mean
        if var <= 1e-12 * (mean * mean if mean * mean > 1.0 else 1.0):
            return self.fallback
        return sqrt(var)

    # -- iteration ---------------------------------------------------------------
    def run(self, iterations=None):
        cdef long long n = self.iterations if iterations is None else iterations
        cdef long long i
        for i in range(n):
            self.iterate()

    def run_iteration(self):
        self.iterate()

    cdef int select(self, int s, double lam) except -1:
        cdef vector[int]* ch = &self.s_children[s]
        cdef int n = <int>ch.size()
        cdef int best = -1, k, q, g
        cdef double val, best_val = -INFINITY
        cdef double logp
        if n < self.s_nact[s]:
            return self.add_q(s)
        logp = log(<double>self.s_nsum[s])
        for k in range(n):
            q = ch[0][k]
            g = self.q_group[q]
            if self.g_N[g] == 0:
                val = INFINITY
            elif lam == 0.0:
                val = self.g_V[g] / self.g_N[g]
            else:
                val = self.g_V[g] / self.g_N[g] + lam * sqrt(logp / self.g_N[g])
            if best < 0 or val > best_val:
                best = q
                best_val = val
        return best

    cdef double rollout(self, int sid, int depth) except? -1e300:
        cdef CoreModel m = self.m
        cdef double g = 0.0
        cdef int a, e
        while not m.tflag[sid] and depth < self.horizon:
            a = <int>(self.draw() * m.nact[sid])
            e = m.edge(sid, a)
            g += m.e_reward[e]
            sid = m.succ[m.e_off[e] + sample_index(&m.cum[m.e_off[e]], m.e_n[e], self.draw())]
            depth += 1
        return g

    cdef int iterate(self) except -1:
        cdef double sigma = self.get_sigma()
        cdef double lam = self.C * sigma
        cdef int s = 0, q, i, nxt, e, leaf, k
        cdef int is_new = 0
        cdef double ret
        self.path.clear()
        while not self.s_term[s]:
            q = self.select(s, lam)
            self.path.push_back(q)
            e = self.q_edge[q]
            i = sample_index(&self.m.cum[self.m.e_off[e]], self.m.e_n[e], self.draw())
            nxt = self.q_succ[q][i]
            if nxt < 0:
                nxt = self.link(q, i, &is_new)
                s = nxt
                if is_new:
                    break
            else:
                s = nxt
        leaf = s
        ret = 0.0 if self.s_term[leaf] else self.rollout(self.s_sid[leaf], self.s_depth[leaf])
        self.backup(leaf, ret)
        if self.variant != UCT:
            self.sigma = sigma
            for k in range(<int>self.path.size() - 1, -1, -1):
                q = self.path[k]
                self.update_q(q, 0)
                self.update_state(self.q_parent[q], 0)
        self.iterations_done += 1
        return 0

    cdef void backup(self, int leaf, double ret):
        cdef double g = ret, val, old, new
        cdef int k, q, p, grp
        self.s_visits[leaf] += 1
        self.g_N[self.s_group[leaf]] += 1
        for k in range(<int>self.path.size() - 1, -1, -1):
            q = self.path[k]
            p = self.q_parent[q]
            g += self.m.e_reward[self.q_edge[q]]
            val = -g if self.s_player[p] == 1 else g
            if self.q_N[q]:
                old = self.q_V[q] / self.q_N[q]
                self.q_sum -= old
                self.q_sumsq -= old * old
            else:
                self.q_count += 1
            self.q_N[q] += 1
            self.q_V[q] += val
            self.q_V2[q] += val * val
            new = self.q_V[q] / self.q_N[q]
            self.q_sum += new
            self.q_sumsq += new * new
            grp = self.q_group[q]
            self.g_N[grp] += 1
            self.g_V[grp] += val
            self.s_visits[p] += 1
            self.s_nsum[p] += 1
            self.g_N[self.s_group[p]] += 1

    # -- abstraction ---------------------------------------------------------------
    cdef double transition_F(self, int q1, int q2):
        cdef int which, q, e, off, n, j, k, key, found
        cdef double sign, thr, pmax, p, total
        self.mass_key.clear()
        self.mass_val.clear()
        for which in range(2):
            q = q1 if which == 0 else q2
            sign = 1.0 if which == 0 else -1.0
            e = self.q_edge[q]
            off = self.m.e_off[e]
            n = self.m.e_n[e]
            pmax = self.m.prob[off]
            for j in range(1, n):
                if self.m.prob[off + j] > pmax:
                    pmax = self.m.prob[off + j]
            thr = self.alpha * pmax
            for j in range(n):
                p = self.m.prob[off + j]
                if p < thr:
                    continue
                key = self.s_group[self.q_succ[q][j]]
                found = -1
                for k in range(<int>self.mass_key.size()):
                    if self.mass_key[k] == key:
                        found = k
                        break
                if found < 0:
                    self.mass_key.push_back(key)
                    self.mass_val.push_back(0.0 + sign * p)
                else:
                    self.mass_val[found] = self.mass_val[found] + sign * p
        total = 0.0
        for k in range(<int>self.mass_val.size()):
            total += self.mass_val[k] if self.mass_val[k] >= 0.0 else -self.mass_val[k]
        return total

    cdef bint q_equiv(self, int q1, int q2):
        cdef double d
        if q1 == q2:
            return True
        d = self.m.e_reward[self.q_edge[q1]] - self.m.e_reward[self.q_edge[q2]]
        if (d if d >= 0.0 else -d) > self.eps_a + 1e-9:
            return False
        return self.transition_F(q1, q2) <= self.eps_t + 1e-9

    cdef bint gate(self, int* counter, int force) noexcept:
        if force:
            return True
        counter[0] += 1
        if counter[0] < self.K:
            return False
        counter[0] = 0
        return True

    cdef void move(self, int kind, int node, int target):
        """Move a node (kind 0 state, 1 Q) to ``target``; -1 creates a singleton."""
        cdef int g = self.s_group[node] if kind == 0 else self.q_group[node]
        cdef int n = self.s_visits[node] if kind == 0 else self.q_N[node]
        cdef double v = 0.0 if kind == 0 else self.q_V[node]
        cdef vector[int]* mem = &self.g_members[g]
        cdef size_t i
        for i in range(mem.size()):
            if mem[0][i] == node:
                mem.erase(mem.begin() + i)
                break
        self.g_N[g] -= n
        self.g_V[g] -= v
        if mem.size() == 0:
            self.drop_group(g)
        elif self.g_rep[g] == node:
            self.g_rep[g] = mem[0][<int>(self.draw() * mem.size())]
        if target < 0:
            target = self.new_group(kind, self.g_depth[g], 0)
            self.g_rep[target] = node
        self.g_members[target].push_back(node)
        self.g_N[target] += n
        self.g_V[target] += v
        if kind == 0:
            self.s_group[node] = target
        else:
            self.q_group[node] = target

    cdef int update_q(self, int q, int force) except -1:
        cdef int g, rep, target, h, r, d, k
        cdef vector[int]* lst
        if not self.gate(&self.q_recency[q], force) or not self.q_full(q):
            return 0
        g = self.q_group[q]
        rep = self.g_rep[g]
        if rep != q and self.q_full(rep) and self.q_equiv(q, rep):
            return 0
        target = -1
        lst = &self.qg_list[self.g_depth[g]]
        for k in range(<int>lst.size()):
            h = lst[0][k]
            if target >= 0 and self.g_members[h].size() <= self.g_members[target].size():
                continue
            r = self.g_rep[h]
            if r == q or (self.q_full(r) and self.q_equiv(q, r)):
                target = h
        if target == g or (target < 0 and self.g_members[g].size() == 1):
            return 0
        self.move(1, q, target)
        self.update_state(self.q_parent[q], self.bypass)
        return 1

    # J of a state into ``out``; mirrors abstraction.compute_J
    cdef void compute_J(self, int s, vector[int]* out):
        cdef vector[int]* ch = &self.s_children[s]
        cdef int n = <int>ch.size(), a, q, b, best, kept
        cdef double qmax, lam, logp, mean, var, half, best_lo, bq
        out.clear()
        if self.variant == IPA and not self.lambda_inf:
            lam = self.lambda_p * self.sigma if self.scaled else self.lambda_p
            self.tmp_q.resize(n)
            for a in range(n):
                q = ch[0][a]
                self.tmp_q[a] = self.q_V[q] / self.q_N[q]
            qmax = self.tmp_q[0]
            for a in range(1, n):
                if self.tmp_q[a] > qmax:
                    qmax = self.tmp_q[a]
            logp = log(<double>self.s_nsum[s])
            for a in range(n):
                q = ch[0][a]
                if self.tmp_q[a] + lam * sqrt(logp / self.q_N[q]) >= qmax:
                    out.push_back(a)
            return
        if self.variant == CONF:
            self.tmp_lo.resize(n)
            self.tmp_hi.resize(n)
            for a in range(n):
                q = ch[0][a]
                if self.q_N[q] < 2:
                    self.tmp_lo[a] = -INFINITY
                    self.tmp_hi[a] = INFINITY
                    continue
                mean = self.q_V[q] / self.q_N[q]
                var = (self.q_V2[q] - self.q_V[q] * mean) / (self.q_N[q] - 1)
                if var < 0.0:
                    var = 0.0
                half = self.z * sqrt(var) / sqrt(<double>self.q_N[q])
                self.tmp_lo[a] = mean - half
                self.tmp_hi[a] = mean + half
            best_lo = self.tmp_lo[0]
            for a in range(1, n):
                if self.tmp_lo[a] > best_lo:
                    best_lo = self.tmp_lo[a]
            for a in range(n):
                if self.tmp_hi[a] >= best_lo:
                    out.push_back(a)
            return
        if self.variant == TOPN and not (self.s_visits[s] < self.n_min or self.n_matches >= n):
            # n_matches best by (-Q, index); emitted in index order
            self.tmp_q.resize(n)
            for a in range(n):
                q = ch[0][a]
                self.tmp_q[a] = self.q_V[q] / self.q_N[q]
            self.tmp_lo.assign(n, 0.0)  # used as "taken" flags
            for kept in range(self.n_matches):
                best = -1
                for a in range(n):
                    if self.tmp_lo[a] != 0.0:
                        continue
                    if best < 0 or self.tmp_q[a] > bq:
                        best = a
                        bq = self.tmp_q[a]
                self.tmp_lo[best] = 1.0
            for a in range(n):
                if self.tmp_lo[a] != 0.0:
                    out.push_back(a)
            return
        for a in range(n):
            out.push_back(a)

    cdef bint similar(self, int s1, int s2, vector[int]* J1, vector[int]* J2, int full2):
        """``J2`` of ``s2`` is its full action set when ``full2`` is set."""
        cdef vector[int]* c1 = &self.s_children[s1]
        cdef vector[int]* c2 = &self.s_children[s2]
        cdef int i, j, g, found
        cdef int n1 = <int>c1.size(), n2 = <int>c2.size()
        if s1 == s2:
            return True
        for i in range(<int>J1.size()):
            g = self.q_group[c1[0][J1[0][i]]]
            found = 0
            for j in range(n2):
                if self.q_group[c2[0][j]] == g:
                    found = 1
                    break
            if not found:
                return False
        for i in range(n2 if full2 else <int>J2.size()):
            g = self.q_group[c2[0][i if full2 else J2[0][i]]]
            found = 0
            for j in range(n1):
                if self.q_group[c1[0][j]] == g:
                    found = 1
                    break
            if not found:
                return False
        return True

    cdef int update_state(self, int s, int force) except -1:
        cdef int g, rep, target, h, r, k, ok
        cdef vector[int] newJ, oldJ
        cdef vector[int]* lst
        if self.s_term[s] or not self.gate(&self.s_recency[s], force):
            return 0
        if self.variant == RSTATE:
            self.s_updated[s] = 1
            return self.rstate(s)
        if not self.s_full(s):
            return 0
        # stored J before this update (full set if never computed)
        if self.s_updated[s]:
            oldJ = self.s_J[s]
        else:
            for k in range(self.s_nact[s]):
                oldJ.push_back(k)
        self.compute_J(s, &newJ)
        self.s_J[s] = newJ
        self.s_updated[s] = 1
        g = self.s_group[s]
        rep = self.g_rep[g]
        if rep != s and self.s_full(rep) and self.similar(s, rep, &newJ, &self.s_J[rep], 0 if self.s_updated[rep] else 1):
            return 0
        target = -1
        lst = &self.sg_list[self.s_depth[s]]
        for k in range(<int>lst.size()):
            h = lst[0][k]
            if self.g_terminal[h] or (target >= 0 and self.g_members[h].size() <= self.g_members[target].size()):
                continue
            r = self.g_rep[h]
            if r == s:
                ok = self.similar(s, s, &newJ, &oldJ, 0)
            else:
                ok = self.s_full(r) and self.similar(s, r, &newJ, &self.s_J[r], 0 if self.s_updated[r] else 1)
            if ok:
                target = h
        if target == g or (target < 0 and self.g_members[g].size() == 1):
            return 0
        self.move(0, s, target)
        self.propagate(s)
        return 1

    cdef int rstate(self, int s) except -1:
        cdef vector[int]* lst
        cdef vector[int] groups
        cdef int k, target
        if self.g_members[self.s_group[s]].size() != 1 or self.s_term[s]:
            return 0
        if not self.draw() < self.p_move:
            return 0
        lst = &self.sg_list[self.s_depth[s]]
        for k in range(<int>lst.size()):
            if not self.g_terminal[lst[0][k]]:
                groups.push_back(lst[0][k])
        target = groups[<int>(self.draw() * groups.size())]
        if target == self.s_group[s]:
            return 0
        self.move(0, s, target)
        self.propagate(s)
        return 1

    cdef int propagate(self, int s) except -1:
        cdef vector[int] parents = self.s_parents[s]
        cdef size_t k
        for k in range(parents.size()):
            self.update_q(parents[k], self.bypass)
        return 0

    # -- results -----------------------------------------------------------------
    def decide(self):
        cdef vector[int]* ch = &self.s_children[0]
        cdef int best = -1, k, q
        cdef double val, best_q = -INFINITY
        for k in range(<int>ch.size()):
            q = ch[0][k]
            if self.q_N[q] == 0:
                continue
            val = self.q_V[q] / self.q_N[q]
            if best < 0 or val > best_q:
                best = self.q_action[q]
                best_q = val
        if best < 0:
            raise NoVisitedChild("no root action has been visited")
        return best

    def root_q_values(self):
        out = [None] * self.s_nact[0]
        for q in self.s_children[0]:
            if self.q_N[q]:
                out[self.q_action[q]] = self.q_V[q] / self.q_N[q]
        return out

    def num_state_nodes(self):
        return self.s_sid.size()

    def snapshot(self):
        cdef int s, q, g, t
        states_py = self.py_model.states
        states = []
        for s in range(<int>self.s_sid.size()):
            states.append((self.s_id[s], self.s_depth[s], states_py[self.s_sid[s]].payload,
                           self.s_visits[s], self.s_nsum[s], self.s_group[s], self.s_recency[s],
                           bool(self.s_updated[s]), bool(self.s_term[s])))
        qnodes = []
        for q in range(<int>self.q_parent.size()):
            succ = []
            for t in self.q_succ[q]:
                succ.append(-1 if t < 0 else self.s_id[t])
            qnodes.append((self.q_id[q], self.s_id[self.q_parent[q]], self.q_action[q], self.q_N[q],
                           self.q_V[q], self.q_V2[q], self.m.e_reward[self.q_edge[q]], self.q_group[q],
                           self.q_recency[q], bool(self.q_full(q)), tuple(succ)))
        groups = []
        for g in range(<int>self.g_kind.size()):
            if not self.g_alive[g]:
                continue
            ids = []
            if self.g_kind[g] == 0:
                for t in self.g_members[g]:
                    ids.append(self.s_id[t])
                rep = self.s_id[self.g_rep[g]]
            else:
                for t in self.g_members[g]:
                    ids.append(self.q_id[t])
                rep = self.q_id[self.g_rep[g]]
            groups.append((g, "state" if self.g_kind[g] == 0 else "qpair", self.g_depth[g],
                           bool(self.g_terminal[g]), rep, tuple(ids), self.g_N[g], self.g_V[g]))
        return GraphSnapshot(tuple(states), tuple(qnodes), tuple(groups), self.q_count, self.q_sum,
                             self.q_sumsq)

