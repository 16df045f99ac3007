#include "helfrich/quadrature.h"

#include <array>
#include <map>

#include "helfrich/errors.h"

namespace helfrich {

namespace {

// Symmetric Dunavant rules, stored as barycentric orbits. Only the rules with
// strictly positive weights are used (the classic degree-3 and degree-7 rules
// carry a negative centroid weight). Reference coordinates are (l2, l3).

void add_centroid(TriangleRule& r, double w) {
  r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
  r.weights.push_back(w);
}

// Orbit of barycentric (a, a, 1-2a): three points.
void add_3(TriangleRule& r, double a, double w) {
  const double c = 1.0 - 2.0 * a;
  r.points.emplace_back(a, c);
  r.points.emplace_back(c, a);
  r.points.emplace_back(a, a);
  for (int i = 0; i < 3; ++i) r.weights.push_back(w);
}

// Orbit of barycentric (a, b, 1-a-b): six points.
void add_6(TriangleRule& r, double a, double b, double w) {
  const double c = 1.0 - a - b;
  const std::array<std::array<double, 2>, 6> pts = {{{b, c}, {a, c}, {c, b}, {c, a}, {a, b}, {b, a}}};
  for (const auto& p : pts) {
    r.points.emplace_back(p[0], p[1]);
    r.weights.push_back(w);
  }
}

std::map<int, TriangleRule> make_rules() {
  std::map<int, TriangleRule> rules;

  {
    TriangleRule r{1, {}, {}};
    add_centroid(r, 1.0);
    rules[1] = std::move(r);
  }
  {
    TriangleRule r{2, {}, {}};
    add_3(r, 1.0 / 6.0, 1.0 / 3.0);
    rules[2] = std::move(r);
  }
  {
    TriangleRule r{4, {}, {}};
    add_3(r, 0.44594849091596488631832925388305, 0.22338158967801146569500700843312);
    add_3(r, 0.09157621350977074345957146340220, 0.10995174365532186763832632490021);
    rules[4] = std::move(r);
  }
  {
    TriangleRule r{5, {}, {}};
    add_centroid(r, 0.225);
    add_3(r, 0.47014206410511508977044120951345, 0.13239415278850618073764938783315);
    add_3(r, 0.10128650732345633880098736191512, 0.12593918054482715259568394550018);
    rules[5] = std::move(r);
  }
  {
    TriangleRule r{6, {}, {}};
    add_3(r, 0.24928674517091042129163855310702, 0.11678627572637936602528961138558);
    add_3(r, 0.06308901449150222834033160287082, 0.05084490637020681692093680910686);
    add_6(r, 0.31035245103378440541660773395655, 0.63650249912139864723014259441205,
          0.08285107561837357519355345642044);
    rules[6] = std::move(r);
  }
  {
    TriangleRule r{8, {}, {}};
    add_centroid(r, 0.14431560767778716825109111048906);
    add_3(r, 0.17056930775176020662229350149146, 0.10321737053471825028179155029212);
    add_3(r, 0.05054722831703097545842355059660, 0.03245849762319808031092592834178);
    add_3(r, 0.45929258829272315602881551449417, 0.09509163426728462479389610438858);
    add_6(r, 0.26311282963463811342178578628464, 0.72849239295540428124100037917606,
          0.02723031417443499426484469007390);
    rules[8] = std::move(r);
  }
  {
    TriangleRule r{9, {}, {}};
    add_centroid(r, 0.09713579628279609890744676309485);
    add_3(r, 0.48968251919873762778370692483619, 0.03133470022713983234393199080984);
    add_3(r, 0.43708959149293663726993036443535, 0.07782754100477543338465495857972);
    add_3(r, 0.18820353561903273024096128046733, 0.07964773892720910288013526957424);
    add_3(r, 0.04472951339445297061024247196780, 0.02557767565869810438673914467637);
    add_6(r, 0.22196298916076569567510252769319, 0.74119859878449802069007987352342,
          0.04328353937728937728937728937729);
    rules[9] = std::move(r);
  }
  {
    TriangleRule r{10, {}, {}};
    add_centroid(r, 0.090817990382754);
    add_3(r, 0.485577633383657, 0.036725957756467);
    add_3(r, 0.109481575485037, 0.045321059435528);
    add_6(r, 0.141707219414880, 0.307939838764121, 0.072757916845420);
    add_6(r, 0.025003534762686, 0.246672560639903, 0.028327242531057);
    add_6(r, 0.009540815400299, 0.066803251012200, 0.009421666963733);
    rules[10] = std::move(r);
  }
  return rules;
}

const std::map<int, TriangleRule>& rules() {
  static const std::map<int, TriangleRule> r = make_rules();
  return r;
}

}  // namespace

int max_quadrature_order() { return 10; }

const TriangleRule& triangle_rule(int order) {
  if (order < 1 || order > max_quadrature_order())
    throw QuadratureUnavailable("quadrature order " + std::to_string(order) +
                                " outside supported range [1, " +
                                std::to_string(max_quadrature_order()) + "]");
  // Lowest stored degree >= order (3 -> 4, 7 -> 8).
  return rules().lower_bound(order)->second;
}

}  // namespace helfrich
