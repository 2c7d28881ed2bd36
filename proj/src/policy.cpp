#include "popec/policy.hpp"

#include <sstream>

namespace popec {

OffloadPolicy OffloadPolicy::zeros(const SystemInstance& inst) {
  OffloadPolicy pol;
  pol.num_users = inst.num_users;
  pol.num_channels = inst.num_channels;
  pol.eta.assign(static_cast<std::size_t>(inst.num_users) * inst.num_channels,
                 0.0);
  pol.t_hat.assign(inst.num_users, 1.0);
  return pol;
}

OffloadPolicy OffloadPolicy::uniform(const SystemInstance& inst, double scale) {
  OffloadPolicy pol = zeros(inst);
  const double share = scale / inst.num_channels;
  for (double& v : pol.eta) v = share;
  return pol;
}

CollaborationPolicy CollaborationPolicy::identity(const SystemInstance& inst) {
  CollaborationPolicy collab;
  collab.num_servers = inst.num_servers;
  collab.eta.assign(
      static_cast<std::size_t>(inst.num_servers) * inst.num_servers, 0.0);
  for (int m = 0; m < inst.num_servers; ++m) collab.at(m, m) = 1.0;
  collab.y.assign(inst.num_servers, 0);
  return collab;
}

std::string PaoiReport::to_csv(const SystemInstance& inst) const {
  std::ostringstream os;
  os << "user,class,E_T,E_I,E_W,E_Y,E_A\n";
  os.precision(12);
  for (int n = 0; n < inst.num_users; ++n) {
    os << n << ',' << inst.user_class[n] << ',' << transmission[n] << ','
       << interarrival[n] << ',' << waiting[n] << ',' << service[n] << ','
       << total[n] << '\n';
  }
  return os.str();
}

}  // namespace popec
