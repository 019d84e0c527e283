#pragma once

// The shipped GPS anti-spoofing scenario, identical to
// scenarios/gps_antispoofing.scn (a test keeps the two in sync).

#include <string_view>

#include "defgraph/graph.hpp"
#include "defgraph/scenario.hpp"

namespace defgraph {

inline constexpr std::string_view kGpsScenarioText = R"scn(
# Defense graph for a GPS receiver protected by six anti-spoofing techniques.
#
# Node state true = the attack is detected at that node. Elements are rated
# with EVITA (expertise, knowledge of target, window of opportunity,
# equipment; each 0..3) or CVSS (base/temporal, 0..10).
#
# Technique names beyond timing check, time-of-arrival check and
# authentication, the element-to-technique assignment, every rating and
# every transmit coefficient are reconstructed; they are not published data.

scenario name="GPS anti-spoofing"

# safety high, privacy high, operational high, financial low -> 10/12
impact safety=3 privacy=3 operational=3 financial=1

node gps kind=component label="GPS receiver"

# techniques
node angle_of_arrival kind=technique label="Angle-of-arrival discrimination"
node authentication kind=technique label="Navigation message authentication"
node power_monitor kind=technique label="Received power monitoring"
node sensor_consistency kind=technique label="Cross-sensor consistency"
node timing_check kind=technique label="Timing check"
node toa_check kind=technique label="Time-of-arrival check"

# elements (reconstructed ratings)
node antenna_array kind=element label="Antenna array phase" cvss=8.8/8.2
node clock_consistency kind=element label="Clock consistency" evita=3,2,3,2
node clock_drift kind=element label="Clock drift bound" cvss=9.0/8.6
node imu_crosscheck kind=element label="IMU dead-reckoning comparison" evita=3,2,2,2
node nav_message_auth kind=element label="Signed navigation data" cvss=9.8/9.4
node odometry_crosscheck kind=element label="Wheel odometry comparison" cvss=7.5/7.0
node signal_power kind=element label="Absolute power / AGC level" evita=2,2,3,2
node toa_delay kind=element label="Arrival delay consistency" evita=2,2,2,1
node toa_pseudorange kind=element label="Pseudorange residuals" evita=1,2,2,2

# element -> technique (reconstructed transmit coefficients)
edge antenna_array angle_of_arrival zeta=0.99
edge clock_consistency timing_check zeta=0.995
edge clock_drift timing_check zeta=0.99
edge imu_crosscheck sensor_consistency zeta=0.95
edge nav_message_auth authentication zeta=0.995
edge odometry_crosscheck sensor_consistency zeta=0.90
edge signal_power power_monitor zeta=0.95
edge toa_delay toa_check zeta=0.99
edge toa_pseudorange toa_check zeta=0.95

# technique -> component
edge angle_of_arrival gps zeta=0.99
edge authentication gps zeta=0.995
edge power_monitor gps zeta=0.95
edge sensor_consistency gps zeta=0.95
edge timing_check gps zeta=0.99
edge toa_check gps zeta=0.99

gate angle_of_arrival noisy_and leak=0.005
gate authentication noisy_and leak=0.005
gate power_monitor noisy_and leak=0.005
gate sensor_consistency noisy_and leak=0.005
gate timing_check noisy_and leak=0.005
gate toa_check noisy_and leak=0.005

# a spoofed signal reaches the receiver unless some deployed technique fires
gate gps noisy_or leak=0
)scn";

/// kGpsScenarioText without the leading newline of the raw literal.
inline std::string_view gps_scenario_text() { return kGpsScenarioText.substr(1); }

inline DefenseGraph gps_scenario() { return parse_scenario(gps_scenario_text()); }

}  // namespace defgraph
