#include "Node.h"
#include "Packet_m.h"

Define_Module(Node);

void Node::initialize()
{
    if (par("sendInitialMessage").boolValue())
        send(new Packet("hello"), "out");
}

void Node::handleMessage(omnetpp::cMessage *msg)
{
    send(msg, "out");
}
