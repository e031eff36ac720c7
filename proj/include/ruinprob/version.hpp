#pragma once

#define RUINPROB_VERSION "0.1.0"
