#include <evoscape/environment.hpp>

#include <cmath>
#include <stdexcept>

namespace evoscape {

void PointPushWorld::validate() const {
    if (agent_radius <= 0 || block_radius <= 0)
        throw std::invalid_argument("PointPushWorld: radii must be > 0");
    if (step_size <= 0 || max_steps < 1)
        throw std::invalid_argument("PointPushWorld: step_size and max_steps must be positive");
    for (int d = 0; d < 2; ++d) {
        if (!(arena_lo[d] < arena_hi[d]))
            throw std::invalid_argument("PointPushWorld: arena bounds inverted");
        if (!(block_start[d] > arena_lo[d] && block_start[d] < arena_hi[d]))
            throw std::invalid_argument("PointPushWorld: block_start must be strictly inside the arena");
    }
}

namespace {

Vector2 clamp_to_arena(const Vector2& p, const PointPushWorld& w) {
    Vector2 out;
    for (int d = 0; d < 2; ++d)
        out[d] = std::min(std::max(p[d], w.arena_lo[d]), w.arena_hi[d]);
    return out;
}

} // namespace

std::pair<Vector, EpisodeTrace> rollout(const PointPushWorld& world, const Genotype& g) {
    world.validate();
    if (g.shape.input_dim != PointPushWorld::kObservationDim ||
        g.shape.output_dim != PointPushWorld::kActionDim)
        throw std::invalid_argument("rollout: genotype shape does not match world io dims");

    const Policy policy = decode(g);
    Vector2 agent = world.agent_start;
    Vector2 block = world.block_start;

    EpisodeTrace trace;
    trace.observations.reserve(world.max_steps);
    trace.actions.reserve(world.max_steps);

    Vector obs(PointPushWorld::kObservationDim);
    for (int step = 0; step < world.max_steps; ++step) {
        obs << agent[0], agent[1], block[0], block[1],
            agent[0] - block[0], agent[1] - block[1],
            block[0] - world.block_start[0], block[1] - world.block_start[1];
        Vector action = forward(policy, obs);

        trace.observations.push_back(obs);
        trace.actions.push_back(action);

        agent += world.step_size * Vector2(action[0], action[1]);
        agent = clamp_to_arena(agent, world);

        const Scalar contact = world.agent_radius + world.block_radius;
        Vector2 delta = block - agent;
        const Scalar dist = delta.norm();
        if (dist < contact) {
            // Positional overlap resolution: push the block out along
            // the contact normal. Degenerate coincident centers push +x.
            Vector2 normal = dist > 0 ? Vector2(delta / dist) : Vector2(1.0, 0.0);
            block += (contact - dist) * normal;
            block = clamp_to_arena(block, world);
        }
        ++trace.step_count;
    }

    Vector behavior(2);
    behavior << block[0], block[1];
    return {std::move(behavior), std::move(trace)};
}

BehaviorFn PointPushWorld::behavior_fn() const {
    PointPushWorld world = *this;
    world.validate();
    return [world](const Genotype& g) { return rollout(world, g).first; };
}

BehaviorFn constant_landscape(Vector value) {
    return [value](const Genotype&) { return value; };
}

BehaviorFn linear_landscape(Matrix a, Vector b) {
    if (a.rows() != b.size())
        throw std::invalid_argument("linear_landscape: A rows must match b length");
    return [a, b](const Genotype& g) -> Vector {
        if (g.weights.size() != a.cols())
            throw std::invalid_argument("linear_landscape: genotype length does not match A");
        return a * g.weights + b;
    };
}

Matrix coordinate_selector(Index behavior_dim, Index parameter_count) {
    Matrix a = Matrix::Zero(behavior_dim, parameter_count);
    for (Index i = 0; i < behavior_dim && i < parameter_count; ++i)
        a(i, i) = 1.0;
    return a;
}

BehaviorFn sinusoid_landscape(Matrix c) {
    return [c](const Genotype& g) -> Vector {
        if (g.weights.size() != c.cols())
            throw std::invalid_argument("sinusoid_landscape: genotype length does not match C");
        Vector out(c.rows());
        for (Index j = 0; j < c.rows(); ++j)
            out[j] = (c.row(j).transpose().array() * g.weights.array()).sin().sum();
        return out;
    };
}

} // namespace evoscape
