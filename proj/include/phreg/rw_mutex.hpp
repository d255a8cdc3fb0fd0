#pragma once

#include <condition_variable>
#include <mutex>

namespace phreg {

// Shared mutex that admits no new readers while a writer is waiting, so a
// steady stream of lookups cannot starve registrations. Satisfies
// SharedMutex for std::shared_lock / std::unique_lock.
class WriterPreferringMutex
{
public:
	void lock()
	{
		std::unique_lock g(m_gate);
		++m_waiting_writers;
		m_cv.wait(g, [&] { return !m_writer && m_readers == 0; });
		--m_waiting_writers;
		m_writer = true;
	}

	void unlock()
	{
		{
			std::lock_guard g(m_gate);
			m_writer = false;
		}
		m_cv.notify_all();
	}

	void lock_shared()
	{
		std::unique_lock g(m_gate);
		m_cv.wait(g, [&] { return !m_writer && m_waiting_writers == 0; });
		++m_readers;
	}

	void unlock_shared()
	{
		bool last;
		{
			std::lock_guard g(m_gate);
			last = --m_readers == 0;
		}
		if (last)
			m_cv.notify_all();
	}

private:
	std::mutex m_gate;
	std::condition_variable m_cv;
	unsigned m_readers{0};
	unsigned m_waiting_writers{0};
	bool m_writer{false};
};

} // namespace phreg
