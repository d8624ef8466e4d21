#include <cmath>
#include <limits>

#include "omnitilt/dynamics.hpp"
#include "test_util.hpp"

using namespace omnitilt;
using omnitilt::testing::random_actuators;
using omnitilt::testing::random_rotation;
using omnitilt::testing::random_vec;

namespace {

VehicleModel quad()
{
  return VehicleModel(VehicleParams::default_quad());
}

ActuatorCommand command(const VecX& f, const VecX& th)
{
  ActuatorCommand c;
  c.thrust = f;
  c.tilt = th;
  return c;
}

// Vertical climb with lagged thrust: z(t) in closed form.
double climb_error(double dt)
{
  const VehicleModel m = quad();
  const TimeConstants tc{0.05, 0.1};
  Plant plant(m, {}, tc);
  PlantState s;
  s.actuators = ActuatorState::uniform(4, 4.0);
  plant.reset(s);
  const ActuatorCommand cmd = ActuatorCommand::hold(ActuatorState::uniform(4, 6.0));
  const double T = 0.5;
  const int steps = static_cast<int>(std::lround(T / dt));
  for (int k = 0; k < steps; ++k) plant.step(cmd, dt);
  const double mass = m.params().mass, g = m.params().gravity, a = tc.alpha_f;
  const double exact = 0.5 * (4.0 * 6.0 / mass - g) * T * T +
                       4.0 * (4.0 - 6.0) / mass * (a * a * (std::exp(-T / a) - 1.0) + a * T);
  return std::abs(plant.state().rigid.p.z() - exact);
}

}  // namespace

TEST(RigidDerivative, HoverEquilibrium)
{
  const VehicleModel m = quad();
  const PlantState s = hover_state(m, Vec3(0, 0, 1));
  const RigidRates r = rigid_derivative(s.rigid, s.actuators, m, {});
  EXPECT_LT(r.p_dot.norm(), 1e-15);
  EXPECT_LT(r.v_dot.norm(), 1e-12);
  EXPECT_LT(r.omega_dot.norm(), 1e-12);
}

TEST(RigidDerivative, FreeFall)
{
  const VehicleModel m = quad();
  RigidState x;
  x.R = rot_x(0.3);
  const RigidRates r = rigid_derivative(x, ActuatorState::uniform(4, 0.0), m, {});
  EXPECT_LT((r.v_dot + 9.81 * e3()).norm(), 1e-15);
}

TEST(RigidDerivative, MatchesDirectFormula)
{
  const VehicleModel m = quad();
  const auto& p = m.params();
  std::mt19937_64 rng(21);
  DisturbanceProfile d;
  d.delta_p = Vec3(0.1, -0.2, 0.05);
  d.delta_r = Vec3(0.3, 0.0, -0.1);
  for (int k = 0; k < 100; ++k) {
    RigidState x;
    x.p = random_vec(rng, 2.0);
    x.v = random_vec(rng, 2.0);
    x.R = random_rotation(rng);
    x.omega = random_vec(rng, 3.0);
    const ActuatorState s = random_actuators(rng, p);
    // independent evaluation: per-rotor thrust vectors summed by hand
    Vec3 f = Vec3::Zero(), tau = Vec3::Zero();
    for (int i = 0; i < 4; ++i) {
      const auto& r = p.rotors[i];
      const Vec3 dir = std::cos(s.tilt(i)) * e3() + std::sin(s.tilt(i)) * r.tilt_axis.cross(e3());
      const Vec3 fi = s.thrust(i) * dir;
      f += fi;
      tau += r.arm.cross(fi) + r.spin * p.drag_coeff * fi;
    }
    const Vec3 v_dot = x.R * f / p.mass - p.gravity * e3() + d.delta_p;
    const Vec3 w_dot =
        p.inertia.inverse() * (-x.omega.cross(p.inertia * x.omega) + tau) + d.delta_r;
    const RigidRates r = rigid_derivative(x, s, m, d);
    EXPECT_LT((r.p_dot - x.v).norm(), 1e-15);
    EXPECT_LT((r.v_dot - v_dot).norm(), 1e-11);
    EXPECT_LT((r.omega_dot - w_dot).norm(), 1e-9);
  }
}

TEST(ActuatorDerivative, Examples)
{
  const TimeConstants tc{0.05, 0.1};
  ActuatorState s = ActuatorState::uniform(1, 2.0, 0.5);
  EXPECT_DOUBLE_EQ(actuator_derivative(s, ActuatorCommand::hold(s), tc).thrust_dot(0), 0.0);
  s.thrust(0) = 0.0;
  const ActuatorRates r = actuator_derivative(s, command(VecX::Constant(1, 1.0), s.tilt), tc);
  EXPECT_DOUBLE_EQ(r.thrust_dot(0), 20.0);
}

TEST(Plant, FirstOrderStepReaches632AtTimeConstant)
{
  const VehicleModel m = quad();
  const TimeConstants tc{0.05, 0.1};
  Plant plant(m, {}, tc);
  PlantState s;
  s.actuators = ActuatorState::uniform(4, 1.0, 0.0);
  plant.reset(s);
  const ActuatorCommand cmd = command(VecX::Constant(4, 2.0), VecX::Constant(4, 0.4));
  for (int k = 0; k < 50; ++k) plant.step(cmd, 1e-3);
  const double frac_f = plant.state().actuators.thrust(0) - 1.0;
  EXPECT_NEAR(frac_f, 1.0 - std::exp(-1.0), 0.01 * 0.632);
  for (int k = 0; k < 50; ++k) plant.step(cmd, 1e-3);
  EXPECT_NEAR(plant.state().actuators.tilt(0) / 0.4, 1.0 - std::exp(-1.0), 0.01 * 0.632);
}

TEST(Plant, ZeroWrenchZeroGravityIsStationary)
{
  VehicleParams p = VehicleParams::default_quad();
  p.gravity = 0.0;
  const VehicleModel m(p);
  Plant plant(m, {}, {});
  PlantState s;
  s.rigid.p = Vec3(1, 2, 3);
  s.rigid.R = rot_y(0.4);
  s.actuators = ActuatorState::uniform(4, 0.0);
  plant.reset(s);
  const ActuatorCommand cmd = ActuatorCommand::hold(s.actuators);
  for (int k = 0; k < 100; ++k) plant.step(cmd, 1e-3);
  EXPECT_LT((plant.state().rigid.p - s.rigid.p).norm(), 1e-15);
  EXPECT_LT((plant.state().rigid.R - s.rigid.R).norm(), 1e-15);
  EXPECT_LT(plant.state().rigid.v.norm(), 1e-15);
}

TEST(Plant, BallisticArcMatchesClosedForm)
{
  const VehicleModel m = quad();
  Plant plant(m, {}, {});
  PlantState s;
  s.rigid.p = Vec3(0.1, -0.2, 5.0);
  s.rigid.v = Vec3(1.0, 0.5, 3.0);
  s.actuators = ActuatorState::uniform(4, 0.0);
  plant.reset(s);
  const ActuatorCommand cmd = ActuatorCommand::hold(s.actuators);
  for (int k = 0; k < 1000; ++k) plant.step(cmd, 1e-3);
  const double t = 1.0;
  const Vec3 exact = s.rigid.p + s.rigid.v * t - 0.5 * 9.81 * t * t * e3();
  EXPECT_LT((plant.state().rigid.p - exact).norm(), 1e-8);
}

TEST(Plant, FourthOrderConvergence)
{
  const double e1 = climb_error(0.01);
  const double e2 = climb_error(0.005);
  EXPECT_GT(e1, 0.0);
  EXPECT_GE(e1 / e2, 8.0) << e1 << " vs " << e2;
}

TEST(Plant, TorqueFreeSpinAboutPrincipalAxis)
{
  const VehicleModel m = quad();
  for (const Vec3& w0 : {Vec3(0, 0, 3.0), Vec3(2.0, 0, 0)}) {
    Plant plant(m, {}, {});
    PlantState s;
    s.rigid.omega = w0;
    s.actuators = ActuatorState::uniform(4, 0.0);
    plant.reset(s);
    const ActuatorCommand cmd = ActuatorCommand::hold(s.actuators);
    for (int k = 0; k < 2000; ++k) plant.step(cmd, 1e-3);
    EXPECT_NEAR(plant.state().rigid.omega.norm(), w0.norm(), 1e-9);
    const Vec3 axis = w0.normalized();
    EXPECT_LT((plant.state().rigid.R - exp_so3(axis, w0.norm() * 2.0)).norm(), 1e-9);
  }
}

TEST(Plant, RotationStaysOrthonormalOverLongRun)
{
  VehicleParams p = VehicleParams::default_quad();
  p.inertia = Vec3(0.03, 0.04, 0.05).asDiagonal();
  const VehicleModel m(p);
  Plant plant(m, {}, {});
  PlantState s;
  s.rigid.omega = Vec3(1.0, 2.0, -1.5);
  s.actuators = ActuatorState::uniform(4, 0.0);
  plant.reset(s);
  const ActuatorCommand cmd = ActuatorCommand::hold(s.actuators);
  const Vec3 L0 = p.inertia * s.rigid.omega;
  for (int k = 0; k < 60000; ++k) plant.step(cmd, 1e-3);
  EXPECT_TRUE(is_rotation(plant.state().rigid.R, 1e-8));
  // world-frame angular momentum is conserved in torque-free motion
  const Vec3 L = plant.state().rigid.R * p.inertia * plant.state().rigid.omega;
  EXPECT_LT((L - L0).norm(), 1e-6);
}

TEST(Plant, HeldCommandKeepsWrenchConstant)
{
  const VehicleModel m = quad();
  std::mt19937_64 rng(22);
  Plant plant(m, {}, {0.07, 0.11});
  PlantState s;
  s.actuators = random_actuators(rng, m.params());
  plant.reset(s);
  const Wrench w0 = m.wrench_from_actuators(s.actuators);
  const ActuatorCommand cmd = ActuatorCommand::hold(s.actuators);
  for (int k = 0; k < 500; ++k) plant.step(cmd, 1e-3);
  EXPECT_LT((plant.outputs().rotor_wrench.stacked() - w0.stacked()).norm(), 1e-12);
}

TEST(Plant, NegativeStepRetracesForwardStep)
{
  const VehicleModel m = quad();
  std::mt19937_64 rng(23);
  Plant plant(m, {}, {});
  PlantState s = hover_state(m, Vec3(0, 0, 1), rot_x(0.2));
  s.rigid.omega = Vec3(0.4, -0.3, 0.2);
  plant.reset(s);
  const ActuatorCommand cmd = ActuatorCommand::hold(random_actuators(rng, m.params()));
  plant.step(cmd, 1e-4);
  plant.step(cmd, -1e-4);
  EXPECT_LT((plant.state().rigid.p - s.rigid.p).norm(), 1e-12);
  EXPECT_LT((plant.state().rigid.R - s.rigid.R).norm(), 1e-12);
  EXPECT_LT((plant.state().actuators.thrust - s.actuators.thrust).norm(), 1e-10);
}

TEST(Plant, NonFiniteStateSetsDiverged)
{
  const VehicleModel m = quad();
  Plant plant(m, {}, {});
  plant.reset(hover_state(m, Vec3::Zero()));
  ActuatorCommand cmd = ActuatorCommand::hold(plant.state().actuators);
  cmd.thrust(0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(plant.step(cmd, 1e-3));
  EXPECT_TRUE(plant.diverged());
  EXPECT_FALSE(plant.step(ActuatorCommand::hold(plant.state().actuators), 1e-3));
}

TEST(HoverState, CancelsGravityAtAnyAttitude)
{
  const VehicleModel m = quad();
  std::mt19937_64 rng(24);
  for (int k = 0; k < 20; ++k) {
    const Mat3 R = random_rotation(rng, 0.8);
    const PlantState s = hover_state(m, Vec3::Zero(), R);
    const RigidRates r = rigid_derivative(s.rigid, s.actuators, m, {});
    EXPECT_LT(r.v_dot.norm(), 1e-10);
    EXPECT_LT(r.omega_dot.norm(), 1e-9);
  }
}

TEST(Tether, SlackStringGivesNoForce)
{
  TetherConfig cfg;
  RigidState x;
  x.p = Vec3(0, 0, 1.2);
  TetherState ts{x.p + cfg.attach - Vec3(0, 0, 0.3), Vec3::Zero(), true};
  const TetherForce f = tether_wrench(x, ts, cfg);
  EXPECT_EQ(f.tension, 0.0);
  EXPECT_EQ(f.body.stacked(), Vec6::Zero());
}

TEST(Tether, StaticHangCarriesPayloadWeight)
{
  TetherConfig cfg;
  RigidState x;
  x.p = Vec3(0.2, 0.1, 1.5);
  x.R = rot_z(0.3);
  const double g = 9.81;
  const double stretch = cfg.mass * g / cfg.stiffness;
  const Vec3 a = x.p + x.R * cfg.attach;
  const TetherState ts{a - (cfg.length + stretch) * e3(), Vec3::Zero(), true};
  const TetherForce f = tether_wrench(x, ts, cfg);
  EXPECT_NEAR(f.tension, 0.21 * 9.81, 1e-12);
  EXPECT_LT((f.world_force - Vec3(0, 0, -2.0601)).norm(), 1e-12);
  EXPECT_LT((f.body.force - x.R.transpose() * f.world_force).norm(), 1e-12);
  EXPECT_LT((f.body.torque - cfg.attach.cross(f.body.force)).norm(), 1e-12);
}

TEST(Tether, DampingActsOnlyWhileStretching)
{
  TetherConfig cfg;
  RigidState x;
  const Vec3 a = x.R * cfg.attach;
  TetherState ts{a - (cfg.length + 0.01) * e3(), Vec3(0, 0, -1.0), true};
  EXPECT_NEAR(tether_wrench(x, ts, cfg).tension, cfg.stiffness * 0.01 + cfg.damping, 1e-9);
  ts.velocity = Vec3(0, 0, 1.0);
  EXPECT_NEAR(tether_wrench(x, ts, cfg).tension, cfg.stiffness * 0.01, 1e-9);
}

TEST(Tether, PayloadStaysOnTableUntilAttachPassesEdge)
{
  const VehicleModel m = quad();
  DisturbanceProfile d;
  d.tether = TetherConfig{};
  Plant plant(m, d, {});
  PlantState s = hover_state(m, Vec3(0.0, 0.0, 1.2));
  s.rigid.v = Vec3(1.0, 0.0, 0.0);
  plant.reset(s);
  const ActuatorCommand cmd = ActuatorCommand::hold(s.actuators);
  for (int k = 0; k < 400; ++k) plant.step(cmd, 1e-3);
  EXPECT_FALSE(plant.state().tether.released);
  EXPECT_EQ(plant.state().tether.position, d.tether->payload_start);
  for (int k = 0; k < 200; ++k) plant.step(cmd, 1e-3);
  EXPECT_TRUE(plant.state().tether.released);
  EXPECT_LT(plant.state().tether.position.z(), d.tether->payload_start.z());
}

TEST(Tether, ImpulseMatchesPayloadMomentumChange)
{
  const VehicleModel m = quad();
  DisturbanceProfile d;
  d.tether = TetherConfig{};
  const double dt = 1e-4;
  Plant plant(m, d, {});
  const PlantState s = hover_state(m, Vec3(0.6, 0.0, 1.2));
  plant.reset(s);
  const ActuatorCommand cmd = ActuatorCommand::hold(s.actuators);
  plant.step(cmd, dt);
  ASSERT_TRUE(plant.state().tether.released);

  while (plant.outputs().tether.tension == 0.0 && plant.state().t < 2.0) plant.step(cmd, dt);
  ASSERT_GT(plant.outputs().tether.tension, 0.0);

  const double mp = d.tether->mass;
  const Vec3 momentum0 = mp * plant.state().tether.velocity;
  const int steps = 1500;
  Vec3 impulse = Vec3::Zero();
  Vec3 prev = plant.outputs().tether.world_force;
  double peak = 0.0;
  for (int k = 0; k < steps; ++k) {
    plant.step(cmd, dt);
    const Vec3 f = plant.outputs().tether.world_force;
    impulse += 0.5 * dt * (prev + f);
    prev = f;
    peak = std::max(peak, f.norm());
  }
  const Vec3 gravity_impulse = -mp * 9.81 * steps * dt * e3();
  const Vec3 dp = mp * plant.state().tether.velocity - momentum0;
  // the string pulls the payload with -F while pulling the vehicle with +F
  const Vec3 from_payload = -(dp - gravity_impulse);
  EXPECT_GT(impulse.norm(), 0.1);
  EXPECT_GT(peak, 5.0);
  EXPECT_LT((impulse - from_payload).norm(), 0.05 * impulse.norm());
}
