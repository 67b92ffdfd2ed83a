// Doc-tested book chapters are wired in here once the guide exists.
