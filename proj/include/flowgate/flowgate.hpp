#pragma once

// Umbrella include for the whole library.

#include "flowgate/access_list.hpp"
#include "flowgate/addr.hpp"
#include "flowgate/alert.hpp"
#include "flowgate/alert_wire.hpp"
#include "flowgate/bytes.hpp"
#include "flowgate/config.hpp"
#include "flowgate/controller.hpp"
#include "flowgate/detector.hpp"
#include "flowgate/errors.hpp"
#include "flowgate/event_store.hpp"
#include "flowgate/flow_switch.hpp"
#include "flowgate/live.hpp"
#include "flowgate/net.hpp"
#include "flowgate/ofl.hpp"
#include "flowgate/packet.hpp"
#include "flowgate/result.hpp"
#include "flowgate/rules.hpp"
#include "flowgate/scenario.hpp"
