#pragma once

// httplib's default accept backlog of 5 drops connections once a few dozen
// simulated users connect at the same moment.
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 1024
#endif

#include <httplib.h>

// glibc's <resolv.h>, pulled in by httplib, defines `_res` as a macro, which
// collides with parameter names inside Eigen.
#ifdef _res
#undef _res
#endif
